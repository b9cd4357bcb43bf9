"""A small mock headline-generator service speaking the labeling wire
protocol, for tests and offline experimentation.

POST /label with {"topic_id": int, "documents": [str, ...], "max_tokens": int}
returns {"label": str}. The label is derived from the request so behaviour is
configurable per instance.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

__all__ = ["MockLabelerServer"]


class MockLabelerServer:
    """In-process HTTP server; use as a context manager in tests.

    label_fn maps the decoded request payload to a label string. fail_first
    makes the first N requests return HTTP 500 (for fallback testing).
    """

    def __init__(self, label_fn=None, fail_first: int = 0, port: int = 0):
        self.label_fn = label_fn or (lambda payload: f"topic {payload['topic_id']} label")
        self.fail_remaining = fail_first
        self.requests: list[dict] = []
        self._lock = threading.Lock()
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):  # noqa: N802 (http.server API)
                length = int(self.headers.get("Content-Length", 0))
                payload = json.loads(self.rfile.read(length).decode("utf-8"))
                with outer._lock:
                    outer.requests.append(payload)
                    fail = outer.fail_remaining > 0
                    if fail:
                        outer.fail_remaining -= 1
                if self.path != "/label" or fail:
                    self.send_response(500)
                    self.end_headers()
                    return
                body = json.dumps({"label": outer.label_fn(payload)}).encode("utf-8")
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def log_message(self, *args):
                pass

        self._server = ThreadingHTTPServer(("127.0.0.1", port), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def endpoint(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "MockLabelerServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self) -> "MockLabelerServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


def main(argv: list[str] | None = None) -> int:
    import argparse

    parser = argparse.ArgumentParser(description="Run the mock labeling service")
    parser.add_argument("--port", type=int, default=8099)
    args = parser.parse_args(argv)
    server = MockLabelerServer(port=args.port)
    print(f"mock labeler listening on {server.endpoint}")
    try:
        server._server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    raise SystemExit(main())