"""Command-line interface: run the pipeline, generate synthetic corpora,
summarize a finished run, or serve the mock labeler."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import mockserver, pipeline, synth

# argparse dest -> PipelineConfig field
CONFIG_FLAGS = {
    "corpus": "corpus_path",
    "stoplist": "stoplist_path",
    "embeddings": "embeddings_path",
    "pca_k": "pca_k",
    "min_cluster_size": "min_cluster_size",
    "min_samples": "min_samples",
    "max_topics": "max_topics",
    "min_df": "min_df",
    "period_start": "period_start",
    "period_end": "period_end",
    "period_width": "period_width",
    "labeler_endpoint": "labeler_endpoint",
    "seed": "seed",
    "out": "out_dir",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trendmap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute the full pipeline")
    run_p.add_argument("--config", help="JSON config file; flags override its fields")
    run_p.add_argument("--corpus", help="corpus NDJSON path")
    run_p.add_argument("--stoplist", help="replacement stoplist file (one term per line)")
    emb = run_p.add_mutually_exclusive_group()
    emb.add_argument("--embeddings", help="external embeddings NDJSON path")
    emb.add_argument("--builtin-embedder", action="store_true", help="use the built-in TF-IDF embedder (default)")
    run_p.add_argument("--pca-k", type=int, dest="pca_k")
    run_p.add_argument("--min-cluster-size", type=int, dest="min_cluster_size")
    run_p.add_argument("--min-samples", type=int, dest="min_samples")
    run_p.add_argument("--max-topics", type=int, dest="max_topics")
    run_p.add_argument("--min-df", type=int, dest="min_df")
    run_p.add_argument("--period-start", type=int, dest="period_start")
    run_p.add_argument("--period-end", type=int, dest="period_end")
    run_p.add_argument("--period-width", type=int, dest="period_width")
    run_p.add_argument("--labeler-endpoint", dest="labeler_endpoint")
    run_p.add_argument("--seed", type=int)
    run_p.add_argument("--out", help="output directory")
    run_p.add_argument("--from", dest="from_stage", default="corpus", choices=pipeline.STAGES,
                       help="re-enter the pipeline at this stage using persisted artifacts")

    synth_p = sub.add_parser("synth-corpus", help="generate a planted-topic synthetic corpus")
    synth_p.add_argument("--topics", type=int, default=5)
    synth_p.add_argument("--docs-per-topic", type=int, default=200)
    synth_p.add_argument("--start-year", type=int, default=2004)
    synth_p.add_argument("--end-year", type=int, default=2021)
    synth_p.add_argument("--seed", type=int, default=7)
    synth_p.add_argument("--out", required=True, help="corpus NDJSON path to write")
    synth_p.add_argument("--truth", help="ground-truth JSON path (default: <out>.truth.json)")

    report_p = sub.add_parser("report", help="print the topic/signal summary of a run")
    report_p.add_argument("--out", required=True, help="run output directory")

    mock_p = sub.add_parser("mock-labeler", help="serve the bundled mock labeling endpoint")
    mock_p.add_argument("--port", type=int, default=8099)
    return parser


def _build_config(args: argparse.Namespace) -> pipeline.PipelineConfig:
    fields: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            fields.update(json.load(fh))
    for dest, field in CONFIG_FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None:
            fields[field] = value
    if args.builtin_embedder:
        fields["embeddings_path"] = None
        fields["builtin_embedder"] = True
    if fields.get("embeddings_path"):
        fields["builtin_embedder"] = False
    fields.setdefault("builtin_embedder", True)
    if "corpus_path" not in fields:
        raise ValueError("a corpus path is required (--corpus or config file)")
    if "out_dir" not in fields:
        raise ValueError("an output directory is required (--out or config file)")
    known = set(pipeline.PipelineConfig.__dataclass_fields__)
    unknown = set(fields) - known
    if unknown:
        raise ValueError(f"unknown config fields: {sorted(unknown)}")
    return pipeline.PipelineConfig(**fields)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = _build_config(args)
            status = pipeline.run(config, from_stage=args.from_stage)
            if status != 0:
                manifest = Path(config.out_dir) / "manifest.json"
                print(f"run failed; see {manifest}", file=sys.stderr)
            return status
        if args.command == "synth-corpus":
            corpus = synth.generate_corpus(
                args.topics, args.docs_per_topic, args.start_year, args.end_year, args.seed
            )
            truth_path = args.truth or f"{args.out}.truth.json"
            synth.write_corpus(corpus, args.out, truth_path)
            print(f"wrote {len(corpus.records)} records to {args.out} (truth: {truth_path})")
            return 0
        if args.command == "report":
            print(pipeline.report_summary(args.out), end="")
            return 0
        if args.command == "mock-labeler":
            return mockserver.main(["--port", str(args.port)])
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())