"""Synthetic corpus generation with planted topics and known labels, plus the
adjusted Rand index used to score recovery."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from math import comb
from pathlib import Path

import numpy as np

from .corpus import DEFAULT_STOPWORDS, normalize_token

__all__ = ["PlantedTopic", "SynthCorpus", "generate_corpus", "write_corpus", "adjusted_rand_index"]

PROFILES = ("flat", "rising", "falling", "late-burst")

_CONSONANTS = "bcdfgklmnprtvz"
_VOWELS = "aeiou"


@dataclass(frozen=True)
class PlantedTopic:
    index: int
    profile: str
    terms: tuple[str, ...]
    burst_year: int | None
    burst_term: str | None
    yearly_counts: dict[int, int]


@dataclass(frozen=True)
class SynthCorpus:
    records: list[dict]
    truth: dict[str, int]  # record id -> planted topic index
    topics: list[PlantedTopic]
    background_terms: tuple[str, ...]


def _make_word(rng: np.random.Generator, taken: set[str]) -> str:
    # CV syllables ending in a vowel survive the suffix normalizer unchanged.
    while True:
        syllables = rng.integers(3, 5)
        word = "".join(
            _CONSONANTS[rng.integers(len(_CONSONANTS))] + _VOWELS[rng.integers(len(_VOWELS))]
            for _ in range(syllables)
        )
        if word in taken or word in DEFAULT_STOPWORDS or normalize_token(word) != word:
            continue
        taken.add(word)
        return word


def _profile_counts(profile: str, years: list[int], total: int, rng: np.random.Generator) -> dict[int, int]:
    n = len(years)
    if profile == "flat":
        weights = np.ones(n)
    elif profile == "rising":
        weights = np.arange(1, n + 1, dtype=float)
    elif profile == "falling":
        weights = np.arange(n, 0, -1, dtype=float)
    elif profile == "late-burst":
        weights = np.ones(n)
        weights[-2] = 4.0 * n  # strong spike in the penultimate year
    else:
        raise ValueError(f"unknown profile {profile!r}")
    raw = weights / weights.sum() * total
    counts = np.floor(raw).astype(int)
    # Distribute the rounding remainder while preserving monotone profiles:
    # rising tops up late years, falling tops up early years.
    short = total - int(counts.sum())
    order = range(n - 1, -1, -1) if profile in ("rising", "late-burst") else range(n)
    for idx in list(order)[:short]:
        counts[idx] += 1
    counts = np.maximum(counts, 1 if total >= n else 0)
    # Rebalance if the floor-of-1 pushed the total over.
    while counts.sum() > total:
        biggest = int(np.argmax(counts))
        counts[biggest] -= 1
    return {y: int(c) for y, c in zip(years, counts)}


def generate_corpus(
    k_topics: int,
    docs_per_topic: int,
    start_year: int,
    end_year: int,
    seed: int,
) -> SynthCorpus:
    """Plant k topics with disjoint 30-term vocabularies plus 10 shared
    background terms and per-topic yearly volume profiles chosen by seed.

    Late-burst topics carry an extra marker term that appears only in their
    burst-year documents.
    """
    if k_topics < 1 or docs_per_topic < 1:
        raise ValueError("k_topics and docs_per_topic must be positive")
    if end_year < start_year:
        raise ValueError("end_year must be >= start_year")
    rng = np.random.default_rng(seed)
    years = list(range(start_year, end_year + 1))
    taken: set[str] = set()
    background = tuple(_make_word(rng, taken) for _ in range(10))

    profile_cycle = list(PROFILES)
    rng.shuffle(profile_cycle)

    topics: list[PlantedTopic] = []
    for t in range(k_topics):
        terms = tuple(_make_word(rng, taken) for _ in range(30))
        profile = profile_cycle[t % len(profile_cycle)]
        counts = _profile_counts(profile, years, docs_per_topic, rng)
        burst_year = years[-2] if profile == "late-burst" and len(years) >= 2 else None
        burst_term = _make_word(rng, taken) if burst_year is not None else None
        topics.append(
            PlantedTopic(
                index=t,
                profile=profile,
                terms=terms,
                burst_year=burst_year,
                burst_term=burst_term,
                yearly_counts=counts,
            )
        )

    records: list[dict] = []
    truth: dict[str, int] = {}
    for topic in topics:
        serial = 0
        for year in years:
            for _ in range(topic.yearly_counts.get(year, 0)):
                doc_id = f"t{topic.index:02d}d{serial:04d}"
                serial += 1
                title = _draw_tokens(rng, topic.terms, background, 5)
                abstract_tokens = _draw_tokens(rng, topic.terms, background, 50, as_list=True)
                if topic.burst_term is not None and year == topic.burst_year:
                    for _ in range(3):
                        abstract_tokens.insert(int(rng.integers(len(abstract_tokens) + 1)), topic.burst_term)
                records.append(
                    {
                        "id": doc_id,
                        "title": title,
                        "abstract": " ".join(abstract_tokens),
                        "year": year,
                    }
                )
                truth[doc_id] = topic.index
    return SynthCorpus(records=records, truth=truth, topics=topics, background_terms=background)


def _draw_tokens(rng, topic_terms, background, count, as_list: bool = False):
    tokens = []
    for _ in range(count):
        if rng.random() < 0.85:
            tokens.append(topic_terms[rng.integers(len(topic_terms))])
        else:
            tokens.append(background[rng.integers(len(background))])
    return tokens if as_list else " ".join(tokens)


def write_corpus(corpus: SynthCorpus, corpus_path: str | Path, truth_path: str | Path) -> None:
    corpus_path = Path(corpus_path)
    corpus_path.parent.mkdir(parents=True, exist_ok=True)
    with open(corpus_path, "w", encoding="utf-8") as fh:
        for rec in corpus.records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    truth = {
        "assignments": corpus.truth,
        "background_terms": list(corpus.background_terms),
        "topics": [
            {
                "index": t.index,
                "profile": t.profile,
                "terms": list(t.terms),
                "burst_year": t.burst_year,
                "burst_term": t.burst_term,
                "yearly_counts": {str(y): c for y, c in sorted(t.yearly_counts.items())},
            }
            for t in corpus.topics
        ],
    }
    with open(truth_path, "w", encoding="utf-8") as fh:
        json.dump(truth, fh, indent=2, sort_keys=True)
        fh.write("\n")


def adjusted_rand_index(labels_a, labels_b) -> float:
    """Chance-corrected agreement between two labelings of the same items."""
    if len(labels_a) != len(labels_b):
        raise ValueError("label sequences differ in length")
    n = len(labels_a)
    if n == 0:
        raise ValueError("empty labelings")
    pair_counts = Counter(zip(labels_a, labels_b))
    a_counts = Counter(labels_a)
    b_counts = Counter(labels_b)
    sum_ij = sum(comb(c, 2) for c in pair_counts.values())
    sum_a = sum(comb(c, 2) for c in a_counts.values())
    sum_b = sum(comb(c, 2) for c in b_counts.values())
    total = comb(n, 2)
    expected = sum_a * sum_b / total if total else 0.0
    max_index = (sum_a + sum_b) / 2.0
    if max_index == expected:
        return 1.0
    return (sum_ij - expected) / (max_index - expected)