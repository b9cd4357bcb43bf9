from __future__ import annotations

import json
from pathlib import Path

import pytest

from trendmap import synth


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory) -> dict:
    """A compact planted corpus shared across pipeline tests."""
    base = tmp_path_factory.mktemp("corpus")
    corpus_path = base / "corpus.ndjson"
    truth_path = base / "corpus.truth.json"
    generated = synth.generate_corpus(4, 60, 2004, 2021, 21)
    synth.write_corpus(generated, corpus_path, truth_path)
    return {
        "corpus_path": corpus_path,
        "truth_path": truth_path,
        "truth": generated.truth,
        "topics": generated.topics,
    }


def read_json(path: Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def tree_bytes(root: Path, exclude: tuple[str, ...] = ("manifest.json",)) -> dict[str, bytes]:
    """Relative path -> content for every file under root, minus exclusions."""
    out = {}
    for path in sorted(root.rglob("*")):
        if path.is_file() and path.name not in exclude:
            out[str(path.relative_to(root))] = path.read_bytes()
    return out