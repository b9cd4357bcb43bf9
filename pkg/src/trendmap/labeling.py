"""Topic label generation: a deterministic heuristic labeler, seeded document
sampling, the external headline-generator wire protocol, and medoid
aggregation of repeated label candidates."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import requests

from .corpus import Document
from .topics import TopicModel, Vocabulary, top_terms

__all__ = [
    "LabelerConfig",
    "TopicLabel",
    "heuristic_label",
    "sample_documents",
    "truncate_texts",
    "external_label",
    "aggregate_labels",
    "label_topics",
]


@dataclass(frozen=True)
class LabelerConfig:
    sample_size: int = 5
    repetitions: int = 15
    max_request_tokens: int = 512
    seed: int = 0
    timeout_seconds: float = 30.0
    max_concurrency: int = 8

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.sample_size < 1:
            raise ValueError(f"sample_size must be >= 1, got {self.sample_size}")


@dataclass(frozen=True)
class TopicLabel:
    topic: int
    label: str
    candidates: tuple[str, ...]
    source: str  # "heuristic" | "external"
    failed_rounds: int = field(default=0)


def heuristic_label(model: TopicModel, vocabulary: Vocabulary, topic: int, n_terms: int = 4) -> TopicLabel:
    """Title-cased top c-TF-IDF terms with duplicate words collapsed."""
    ranked = top_terms(model.ctfidf, topic, n_terms, vocabulary)
    words: list[str] = []
    seen: set[str] = set()
    for term, _ in ranked:
        for word in term.split():
            if word not in seen:
                seen.add(word)
                words.append(word)
    label = " ".join(w[:1].upper() + w[1:] for w in words)
    return TopicLabel(topic=topic, label=label, candidates=(label,), source="heuristic")


def sample_documents(
    documents: list[Document],
    model: TopicModel,
    topic: int,
    config: LabelerConfig,
    round_index: int,
) -> list[Document]:
    """Up to sample_size member documents, drawn without replacement by a
    generator seeded from (seed, topic, round)."""
    members = [doc for doc, label in zip(documents, model.assignments) if label == topic]
    if not members:
        raise ValueError(f"topic {topic} has no documents")
    if len(members) <= config.sample_size:
        return members
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, topic, round_index]))
    picks = rng.permutation(len(members))[: config.sample_size]
    return [members[i] for i in sorted(picks)]


def truncate_texts(texts: list[str], max_tokens: int) -> list[str]:
    """Trim a document list so the total whitespace-token count fits the
    budget; tokens are never split."""
    out: list[str] = []
    remaining = max_tokens
    for text in texts:
        if remaining <= 0:
            break
        tokens = text.split()
        if len(tokens) <= remaining:
            out.append(text)
            remaining -= len(tokens)
        else:
            out.append(" ".join(tokens[:remaining]))
            remaining = 0
    return out


def external_label(
    endpoint: str,
    topic: int,
    samples: list[str],
    config: LabelerConfig,
) -> str | None:
    """One labeling round: POST the (truncated) sample texts, return the label.

    Returns None on any failure (non-200, malformed body, timeout, connection
    error); the caller counts and skips failed rounds.
    """
    payload = {
        "topic_id": topic,
        "documents": truncate_texts(samples, config.max_request_tokens),
        "max_tokens": config.max_request_tokens,
    }
    try:
        response = requests.post(f"{endpoint.rstrip('/')}/label", json=payload, timeout=config.timeout_seconds)
    except requests.RequestException:
        return None
    if response.status_code != 200:
        return None
    try:
        body = response.json()
    except ValueError:
        return None
    label = body.get("label") if isinstance(body, dict) else None
    if not isinstance(label, str):
        return None
    return label


def aggregate_labels(candidates: list[str]) -> str:
    """The candidate with the highest mean token-set Jaccard similarity to the
    others (the medoid); ties go to the earliest round."""
    if not candidates:
        raise ValueError("aggregate_labels requires at least one candidate")
    if len(candidates) == 1:
        return candidates[0]
    token_sets = [set(c.split()) for c in candidates]
    best_idx = 0
    best_score = -1.0
    for i in range(len(candidates)):
        scores = [_jaccard(token_sets[i], token_sets[j]) for j in range(len(candidates)) if j != i]
        mean = sum(scores) / len(scores)
        if mean > best_score + 1e-12:
            best_score = mean
            best_idx = i
    return candidates[best_idx]


def _jaccard(a: set[str], b: set[str]) -> float:
    if not a and not b:
        return 1.0
    union = len(a | b)
    return len(a & b) / union if union else 1.0


def _label_one_topic(
    documents: list[Document],
    model: TopicModel,
    vocabulary: Vocabulary,
    topic: int,
    config: LabelerConfig,
    endpoint: str,
) -> TopicLabel:
    candidates: list[str] = []
    failed = 0
    for round_index in range(config.repetitions):
        samples = sample_documents(documents, model, topic, config, round_index)
        texts = [" ".join(doc.tokens) for doc in samples]
        label = external_label(endpoint, topic, texts, config)
        if label is None:
            failed += 1
        else:
            candidates.append(label)
    if not candidates:
        fallback = heuristic_label(model, vocabulary, topic)
        return TopicLabel(
            topic=topic,
            label=fallback.label,
            candidates=fallback.candidates,
            source="heuristic",
            failed_rounds=failed,
        )
    return TopicLabel(
        topic=topic,
        label=aggregate_labels(candidates),
        candidates=tuple(candidates),
        source="external",
        failed_rounds=failed,
    )


def label_topics(
    documents: list[Document],
    model: TopicModel,
    vocabulary: Vocabulary,
    config: LabelerConfig,
    endpoint: str | None = None,
) -> list[TopicLabel]:
    """Label every topic: heuristically when no endpoint is configured,
    otherwise via repeated external rounds with heuristic fallback.

    Topics are labelled concurrently (bounded by max_concurrency); rounds
    within a topic stay sequential so the round index seeds the sampler.
    """
    if endpoint is None:
        return [heuristic_label(model, vocabulary, t) for t in model.topic_ids]
    workers = max(1, min(config.max_concurrency, len(model.topic_ids)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_label_one_topic, documents, model, vocabulary, t, config, endpoint)
            for t in model.topic_ids
        ]
        return [f.result() for f in futures]