"""Pipeline orchestration: stage sequencing, artifact persistence for stage
re-entry, report emission, and the run manifest."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import clustering, corpus, dynamics, embedding, labeling, signals, topics

__all__ = ["PipelineConfig", "StageError", "run", "report_summary", "STAGES"]

STAGES = ("corpus", "embedding", "clustering", "topics", "labeling", "dynamics", "signals")

ARTIFACTS_DIR = "artifacts"


@dataclass(frozen=True)
class PipelineConfig:
    corpus_path: str
    out_dir: str
    stoplist_path: str | None = None
    embeddings_path: str | None = None
    builtin_embedder: bool = True
    pca_k: int = 10
    min_cluster_size: int = 12
    min_samples: int | None = None
    max_topics: int = 100
    min_df: int = 3
    period_start: int = 2004
    period_end: int = 2021
    period_width: int = 6
    labeler_endpoint: str | None = None
    seed: int = 42
    label_sample_size: int = 5
    label_repetitions: int = 15
    label_max_tokens: int = 512

    def validate(self) -> None:
        corpus.build_periods(self.period_start, self.period_end, self.period_width)
        if self.embeddings_path is None and not self.builtin_embedder:
            raise ValueError("either an embeddings file or the builtin embedder must be selected")
        if self.pca_k < 1:
            raise ValueError(f"pca_k must be >= 1, got {self.pca_k}")
        clustering.ClusterParams(self.min_cluster_size, self.min_samples)
        if self.max_topics < 1:
            raise ValueError(f"max_topics must be >= 1, got {self.max_topics}")
        if self.min_df < 1:
            raise ValueError(f"min_df must be >= 1, got {self.min_df}")

    def resolved(self) -> dict:
        data = dataclasses.asdict(self)
        if data["min_samples"] is None:
            data["min_samples"] = data["min_cluster_size"]
        return data


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage


class _Run:
    """Mutable run state: config, output paths, counters, and file tracking."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = Path(config.out_dir)
        self.art = self.out / ARTIFACTS_DIR
        self.stoplist = (
            corpus.read_stoplist(config.stoplist_path)
            if config.stoplist_path
            else corpus.Stoplist(corpus.DEFAULT_STOPWORDS)
        )
        self.periods = corpus.build_periods(config.period_start, config.period_end, config.period_width)
        self.counters: dict = {}
        self.timings: dict[str, float] = {}
        self.written: list[Path] = []
        # In-memory stage products (filled by stages or reloaded from artifacts)
        self.documents: list[corpus.Document] | None = None
        self.vocabulary: topics.Vocabulary | None = None
        self.reduced: embedding.EmbeddingMatrix | None = None
        self.model: topics.TopicModel | None = None
        self.labels: list[labeling.TopicLabel] | None = None
        self.series: dict[int, dynamics.TimeSeries] | None = None

    def path(self, *parts: str) -> Path:
        p = self.out.joinpath(*parts)
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def track(self, p: Path) -> Path:
        self.written.append(p)
        return p


def _write_ndjson(path: Path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def _read_ndjson(path: Path) -> list[dict]:
    if not path.exists():
        raise StageError("resume", f"missing artifact {path}; re-run from an earlier stage")
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _fmt(value: float) -> float:
    # json round-trips repr(float); passing floats straight through keeps
    # byte-identical output across runs.
    return float(value)


# --------------------------------------------------------------------------
# stages


def _stage_corpus(run: _Run) -> None:
    cfg = run.config
    records = corpus.read_corpus(cfg.corpus_path)
    documents, stats = corpus.build_documents(records, run.stoplist, cfg.period_start, cfg.period_end)
    if not documents:
        raise StageError("corpus", "empty corpus after filtering")
    run.documents = documents
    per_year: dict[str, int] = {}
    for doc in documents:
        per_year[str(doc.year)] = per_year.get(str(doc.year), 0) + 1
    run.counters["corpus"] = {**stats, "per_year": dict(sorted(per_year.items()))}
    _write_ndjson(
        run.track(run.path(ARTIFACTS_DIR, "documents.ndjson")),
        ({"id": d.id, "tokens": list(d.tokens), "year": d.year} for d in documents),
    )


def _load_documents(run: _Run) -> list[corpus.Document]:
    if run.documents is None:
        rows = _read_ndjson(run.art / "documents.ndjson")
        run.documents = [corpus.Document(r["id"], tuple(r["tokens"]), int(r["year"])) for r in rows]
    return run.documents


def _stage_embedding(run: _Run) -> None:
    cfg = run.config
    documents = _load_documents(run)
    vocabulary = topics.build_vocabulary(documents, cfg.min_df)
    run.vocabulary = vocabulary
    ids = [d.id for d in documents]
    if cfg.embeddings_path:
        full = embedding.load_embeddings(cfg.embeddings_path, ids)
    else:
        full = embedding.builtin_embed(documents, vocabulary, seed=cfg.seed)
    k = min(cfg.pca_k, len(ids), full.vectors.shape[1])
    _, reduced = embedding.pca_fit_transform(full, k)
    run.reduced = reduced
    run.counters["embedding"] = {
        "dimensions": int(full.vectors.shape[1]),
        "reduced_to": k,
        "zero_rows": len(full.zero_ids),
        "source": "external" if cfg.embeddings_path else "builtin",
    }
    _write_ndjson(
        run.track(run.path(ARTIFACTS_DIR, "reduced_embeddings.ndjson")),
        ({"id": i, "vector": [_fmt(v) for v in row]} for i, row in zip(reduced.ids, reduced.vectors)),
    )


def _load_reduced(run: _Run) -> embedding.EmbeddingMatrix:
    if run.reduced is None:
        documents = _load_documents(run)
        run.reduced = embedding.load_embeddings(run.art / "reduced_embeddings.ndjson", [d.id for d in documents])
    return run.reduced


def _stage_clustering(run: _Run) -> None:
    cfg = run.config
    reduced = _load_reduced(run)
    params = clustering.ClusterParams(cfg.min_cluster_size, cfg.min_samples)
    labeled = clustering.hdbscan(reduced.vectors, params)
    run.counters["clustering"] = {
        "clusters": labeled.n_clusters,
        "noise": labeled.labels.count(-1),
    }
    _write_ndjson(
        run.track(run.path(ARTIFACTS_DIR, "assignments.ndjson")),
        (
            {"id": i, "topic": t, "probability": _fmt(p)}
            for i, t, p in zip(reduced.ids, labeled.labels, labeled.probabilities)
        ),
    )


def _load_assignments(run: _Run, name: str) -> list[int]:
    documents = _load_documents(run)
    rows = _read_ndjson(run.art / name)
    by_id = {r["id"]: int(r["topic"]) for r in rows}
    missing = [d.id for d in documents if d.id not in by_id]
    if missing:
        raise StageError("resume", f"artifact {name} is missing id {missing[0]!r}")
    return [by_id[d.id] for d in documents]


def _centroid_vectors(run: _Run) -> np.ndarray:
    """Embedding space used for topic centroids: the full external space when
    supplied, the reduced space for the builtin embedder."""
    documents = _load_documents(run)
    if run.config.embeddings_path:
        return embedding.load_embeddings(run.config.embeddings_path, [d.id for d in documents]).vectors
    return _load_reduced(run).vectors


def _stage_topics(run: _Run) -> None:
    cfg = run.config
    documents = _load_documents(run)
    if run.vocabulary is None:
        run.vocabulary = topics.build_vocabulary(documents, cfg.min_df)
    assignments = _load_assignments(run, "assignments.ndjson")
    if all(a == -1 for a in assignments):
        run.counters["topics"] = {"topics": 0, "merges": 0, "all_noise": True}
        run.model = None
        _write_ndjson(run.track(run.path(ARTIFACTS_DIR, "topic_assignments.ndjson")), iter(()))
        _write_csv(run.track(run.path("similarity.csv")), ["topic_id"], [])
        return
    vectors = _centroid_vectors(run)
    model = topics.fit_topics(documents, assignments, run.vocabulary, vectors)
    before = model.n_topics
    model = topics.reduce_topics(model, cfg.max_topics, documents, run.vocabulary, vectors)
    run.model = model
    run.counters["topics"] = {"topics": model.n_topics, "merges": before - model.n_topics, "all_noise": False}
    _write_ndjson(
        run.track(run.path(ARTIFACTS_DIR, "topic_assignments.ndjson")),
        ({"id": d.id, "topic": t} for d, t in zip(documents, model.assignments)),
    )
    sim = topics.topic_similarity(model)
    header = ["topic_id"] + [str(t) for t in model.topic_ids]
    rows = [[str(t)] + [repr(_fmt(v)) for v in sim[i]] for i, t in enumerate(model.topic_ids)]
    _write_csv(run.track(run.path("similarity.csv")), header, rows)


def _load_model(run: _Run) -> topics.TopicModel | None:
    if run.model is None:
        documents = _load_documents(run)
        if run.vocabulary is None:
            run.vocabulary = topics.build_vocabulary(documents, run.config.min_df)
        rows = _read_ndjson(run.art / "topic_assignments.ndjson")
        if not rows:  # persisted all-noise run
            return None
        assignments = _load_assignments(run, "topic_assignments.ndjson")
        if all(a == -1 for a in assignments):
            return None
        run.model = topics.fit_topics(documents, assignments, run.vocabulary, _centroid_vectors(run))
    return run.model


def _stage_labeling(run: _Run) -> None:
    cfg = run.config
    model = _load_model(run)
    if model is None:
        run.counters["labeling"] = {"labelled": 0, "failed_rounds": 0}
        run.labels = []
        _write_ndjson(run.track(run.path(ARTIFACTS_DIR, "labels.ndjson")), iter(()))
        _write_csv(run.track(run.path("topics.csv")), ["topic_id", "label", "count", "top_terms"], [])
        return
    config = labeling.LabelerConfig(
        sample_size=cfg.label_sample_size,
        repetitions=cfg.label_repetitions,
        max_request_tokens=cfg.label_max_tokens,
        seed=cfg.seed,
    )
    documents = _load_documents(run)
    labels = labeling.label_topics(documents, model, run.vocabulary, config, cfg.labeler_endpoint)
    run.labels = labels
    run.counters["labeling"] = {
        "labelled": len(labels),
        "failed_rounds": sum(l.failed_rounds for l in labels),
        "heuristic_fallbacks": sum(1 for l in labels if l.source == "heuristic" and cfg.labeler_endpoint),
    }
    _write_ndjson(
        run.track(run.path(ARTIFACTS_DIR, "labels.ndjson")),
        (
            {"topic": l.topic, "label": l.label, "source": l.source, "candidates": list(l.candidates)}
            for l in labels
        ),
    )
    label_by_topic = {l.topic: l.label for l in labels}
    rows = []
    for t in model.topic_ids:
        terms = topics.top_terms(model.ctfidf, t, 10, run.vocabulary)
        rows.append(
            [str(t), label_by_topic[t], str(model.counts[t]), "|".join(term for term, _ in terms)]
        )
    _write_csv(run.track(run.path("topics.csv")), ["topic_id", "label", "count", "top_terms"], rows)


def _stage_dynamics(run: _Run) -> None:
    cfg = run.config
    model = _load_model(run)
    documents = _load_documents(run)
    if model is None:
        run.counters["dynamics"] = {"series": 0, "empty_years": []}
        run.series = {}
        return
    series, empty_years = dynamics.yearly_proportions(
        model.assignments, documents, cfg.period_start, cfg.period_end
    )
    run.series = series
    sliced = dynamics.time_sliced_ctfidf(documents, model.assignments, run.vocabulary)
    run.counters["dynamics"] = {"series": len(series), "empty_years": empty_years}
    for topic, ts in series.items():
        fit = dynamics.ols_trend(ts)
        peaks = dynamics.detect_peaks(ts)
        payload = {
            "topic": topic,
            "years": list(ts.years),
            "proportions": [_fmt(p) for p in ts.proportions],
            "fit": {"slope": _fmt(fit.slope), "intercept": _fmt(fit.intercept)},
            "ci": [_fmt(w) for w in fit.ci_half_width],
            "peaks": [
                {
                    "year": year,
                    "value": _fmt(value),
                    "top_terms": [term for term, _ in sliced.get((topic, year), [])],
                }
                for year, value in peaks.peaks
            ],
        }
        path = run.track(run.path("trends", f"{topic}.json"))
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True)
            fh.write("\n")


def _stage_signals(run: _Run) -> None:
    cfg = run.config
    model = _load_model(run)
    documents = _load_documents(run)
    period_names = [f"p{lo}_{hi}" for lo, hi in run.periods.periods]
    if model is None:
        for period in run.periods.periods:
            payload = {"period": list(period), "x_threshold": 0.0, "points": []}
            _write_json_file(run.track(run.path(f"tem_{period[0]}_{period[1]}.json")), payload)
        _write_csv(run.track(run.path("signals.csv")), ["topic_id"] + period_names, [])
        _write_json_file(run.track(run.path("transitions.json")), {"transitions": []})
        run.counters["signals"] = {"periods": len(run.periods.periods), "topics": 0}
        return
    if run.series is None:
        series, _ = dynamics.yearly_proportions(model.assignments, documents, cfg.period_start, cfg.period_end)
        run.series = series
    doc_counts: dict[int, dict[int, int]] = {}
    for doc, label in zip(documents, model.assignments):
        if label == -1:
            continue
        doc_counts.setdefault(label, {})
        doc_counts[label][doc.year] = doc_counts[label].get(doc.year, 0) + 1

    maps = []
    for period in run.periods.periods:
        tem = signals.build_tem(run.series, doc_counts, period)
        maps.append(tem)
        payload = {
            "period": list(period),
            "x_threshold": _fmt(tem.x_threshold),
            "points": [
                {
                    "topic": p.topic,
                    "avg_proportion": _fmt(p.avg_proportion),
                    "growth_rate": _fmt(p.growth_rate),
                    "doc_count": p.doc_count,
                    "signal": cls.value,
                }
                for p, cls in zip(tem.points, tem.classes)
            ],
        }
        _write_json_file(run.track(run.path(f"tem_{period[0]}_{period[1]}.json")), payload)

    evolution = signals.evolution_matrix(maps, list(model.topic_ids))
    rows = [
        [str(t)] + [evolution.matrix[(t, p)].value for p in range(len(maps))]
        for t in model.topic_ids
    ]
    _write_csv(run.track(run.path("signals.csv")), ["topic_id"] + period_names, rows)
    _write_json_file(
        run.track(run.path("transitions.json")),
        {
            "transitions": [
                {
                    "topic": t,
                    "period_index": p,
                    "from": before.value,
                    "to": after.value,
                }
                for t, p, before, after in evolution.transitions
            ]
        },
    )
    run.counters["signals"] = {"periods": len(maps), "topics": model.n_topics}


_STAGE_FNS = {
    "corpus": _stage_corpus,
    "embedding": _stage_embedding,
    "clustering": _stage_clustering,
    "topics": _stage_topics,
    "labeling": _stage_labeling,
    "dynamics": _stage_dynamics,
    "signals": _stage_signals,
}


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _write_json_file(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def run(config: PipelineConfig, from_stage: str = "corpus") -> int:
    """Execute the pipeline stages in order, persisting artifacts and reports.

    Returns 0 on success. On a stage failure the stage's partial outputs are
    removed, the manifest records the failing stage, and 1 is returned.
    """
    config.validate()
    if from_stage not in STAGES:
        raise ValueError(f"unknown stage {from_stage!r}; expected one of {STAGES}")
    run_state = _Run(config)
    run_state.out.mkdir(parents=True, exist_ok=True)
    start_at = STAGES.index(from_stage)
    failure: dict | None = None
    for stage in STAGES[start_at:]:
        fn = _STAGE_FNS[stage]
        stage_start = time.perf_counter()
        before = len(run_state.written)
        try:
            fn(run_state)
        except Exception as exc:  # noqa: BLE001 (boundary: report and clean up)
            for path in run_state.written[before:]:
                path.unlink(missing_ok=True)
            del run_state.written[before:]
            failure = {"stage": stage, "error": str(exc)}
            break
        run_state.timings[stage] = time.perf_counter() - stage_start
    _write_manifest(run_state, from_stage, failure)
    return 0 if failure is None else 1


def _write_manifest(run_state: _Run, from_stage: str, failure: dict | None) -> None:
    manifest = {
        "config": run_state.config.resolved(),
        "from_stage": from_stage,
        "periods": [list(p) for p in run_state.periods.periods],
        "counters": run_state.counters,
        "timings_seconds": {k: round(v, 6) for k, v in run_state.timings.items()},
        "status": "failed" if failure else "ok",
    }
    if failure:
        manifest["failure"] = failure
    files = {}
    for path in sorted(set(run_state.written)):
        if path.exists():
            files[str(path.relative_to(run_state.out))] = _sha256(path)
    manifest["files"] = files
    _write_json_file(run_state.out / "manifest.json", manifest)


def report_summary(out_dir: str | Path) -> str:
    """Tabulate topic id, label, count (descending) and per-period signals
    from a completed run directory."""
    out = Path(out_dir)
    rows = []
    topics_csv = out / "topics.csv"
    signals_csv = out / "signals.csv"
    for required in (topics_csv, signals_csv):
        if not required.exists():
            raise FileNotFoundError(f"missing report file: {required}")
    topic_rows = _read_csv(topics_csv)
    signal_rows = {r[0]: r[1:] for r in _read_csv(signals_csv)}
    signal_header = _read_csv_header(signals_csv)[1:]
    if not topic_rows:
        return "no topics discovered (all documents classified as noise)\n"
    header = ["topic_id", "label", "count"] + signal_header
    rows = []
    for r in sorted(topic_rows, key=lambda r: (-int(r[2]), int(r[0]))):
        rows.append([r[0], r[1], r[2]] + signal_rows.get(r[0], ["?"] * len(signal_header)))
    widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def _read_csv(path: Path) -> list[list[str]]:
    with open(path, encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    return [line.split(",") for line in lines[1:]]


def _read_csv_header(path: Path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return fh.readline().rstrip("\n").split(",")