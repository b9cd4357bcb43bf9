"""Class-based TF-IDF topic representations over unigram+bigram vocabularies,
topic-count reduction by merging, and topic similarity."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .corpus import Document

__all__ = [
    "Vocabulary",
    "CtfidfMatrix",
    "TopicModel",
    "build_vocabulary",
    "term_counts",
    "ctfidf",
    "top_terms",
    "fit_topics",
    "reduce_topics",
    "topic_similarity",
]


@dataclass(frozen=True)
class Vocabulary:
    """Lexicographically ordered unigram and bigram terms with document frequencies."""

    terms: tuple[str, ...]
    index: dict[str, int]
    df: tuple[int, ...]


@dataclass(frozen=True)
class CtfidfMatrix:
    """Per-topic term weights W[t, c] = tf(t, c) * ln(1 + A / f_t).

    tf is the class-relative term frequency (count within the class's
    concatenated tokens over the class's total token count), f_t the term's
    occurrence count across all classes, and A the mean class token total.
    """

    topic_ids: tuple[int, ...]
    weights: np.ndarray
    class_token_totals: tuple[int, ...]
    term_corpus_freq: np.ndarray
    avg_tokens_per_class: float

    def row(self, topic: int) -> np.ndarray:
        return self.weights[self.topic_ids.index(topic)]


@dataclass(frozen=True)
class TopicModel:
    """Hard document-to-topic assignments plus topic representations.

    assignments[i] is the topic of documents[i], -1 for noise. Topic ids run
    0..T-1 ordered by descending document count. topic_embeddings row t is the
    centroid of member rows of whichever embedding space the model was fit in.
    """

    assignments: tuple[int, ...]
    topic_ids: tuple[int, ...]
    counts: tuple[int, ...]
    ctfidf: CtfidfMatrix
    topic_embeddings: np.ndarray

    @property
    def n_topics(self) -> int:
        return len(self.topic_ids)


def build_vocabulary(documents: list[Document], min_df: int) -> Vocabulary:
    """Collect unigrams and adjacent bigrams appearing in >= min_df documents."""
    if min_df < 1:
        raise ValueError(f"min_df must be >= 1, got {min_df}")
    df_counter: Counter[str] = Counter()
    for doc in documents:
        df_counter.update(set(_doc_terms(doc.tokens)))
    terms = tuple(sorted(t for t, c in df_counter.items() if c >= min_df))
    if not terms:
        raise ValueError(f"empty vocabulary: no term appears in >= {min_df} documents")
    return Vocabulary(
        terms=terms,
        index={t: i for i, t in enumerate(terms)},
        df=tuple(df_counter[t] for t in terms),
    )


def _doc_terms(tokens: tuple[str, ...]):
    yield from tokens
    for a, b in zip(tokens, tokens[1:]):
        yield f"{a} {b}"


def term_counts(tokens: tuple[str, ...], vocabulary: Vocabulary) -> Counter[str]:
    """Occurrence counts of in-vocabulary unigrams and adjacent bigrams."""
    counts: Counter[str] = Counter()
    for term in _doc_terms(tokens):
        if term in vocabulary.index:
            counts[term] += 1
    return counts


def ctfidf(
    documents: list[Document],
    assignments: list[int] | tuple[int, ...],
    vocabulary: Vocabulary,
) -> CtfidfMatrix:
    """Class-based TF-IDF over concatenated per-topic token bags; noise excluded."""
    class_docs: dict[int, list[Document]] = {}
    for doc, label in zip(documents, assignments):
        if label == -1:
            continue
        class_docs.setdefault(label, []).append(doc)
    if not class_docs:
        raise ValueError("ctfidf requires at least one non-noise class")

    topic_ids = tuple(sorted(class_docs))
    n_terms = len(vocabulary.terms)
    raw_counts = np.zeros((len(topic_ids), n_terms), dtype=float)
    token_totals: list[int] = []
    for row, topic in enumerate(topic_ids):
        total = 0
        for doc in class_docs[topic]:
            total += len(doc.tokens)
            for term, count in term_counts(doc.tokens, vocabulary).items():
                raw_counts[row, vocabulary.index[term]] += count
        if total == 0:
            raise ValueError(f"class {topic} has zero tokens")
        token_totals.append(total)

    totals = np.asarray(token_totals, dtype=float)
    tf = raw_counts / totals[:, None]
    f_t = raw_counts.sum(axis=0)
    avg_tokens = float(totals.mean())
    idf = np.zeros(n_terms)
    seen = f_t > 0
    idf[seen] = np.log1p(avg_tokens / f_t[seen])
    weights = tf * idf
    return CtfidfMatrix(
        topic_ids=topic_ids,
        weights=weights,
        class_token_totals=tuple(token_totals),
        term_corpus_freq=f_t,
        avg_tokens_per_class=avg_tokens,
    )


def top_terms(matrix: CtfidfMatrix, topic: int, n: int, vocabulary: Vocabulary) -> list[tuple[str, float]]:
    """The n highest-weight terms of a topic, ties broken lexicographically."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    row = matrix.row(topic)
    support = [(vocabulary.terms[i], float(w)) for i, w in enumerate(row) if w > 0.0]
    support.sort(key=lambda tw: (-tw[1], tw[0]))
    return support[:n]


def _centroids(assignments, topic_ids, vectors: np.ndarray) -> np.ndarray:
    labels = np.asarray(assignments)
    out = np.zeros((len(topic_ids), vectors.shape[1]), dtype=float)
    for row, topic in enumerate(topic_ids):
        out[row] = vectors[labels == topic].mean(axis=0)
    return out


def fit_topics(
    documents: list[Document],
    assignments: list[int] | tuple[int, ...],
    vocabulary: Vocabulary,
    doc_vectors: np.ndarray,
) -> TopicModel:
    """Assemble a TopicModel from hard assignments, renumbering topics by size.

    Topic 0 is the largest; ties broken by the smallest member index.
    """
    labels = list(assignments)
    present = sorted(set(labels) - {-1})
    if not present:
        raise ValueError("all documents are noise; no topics to fit")
    order = sorted(
        present,
        key=lambda t: (-labels.count(t), min(i for i, v in enumerate(labels) if v == t)),
    )
    remap = {old: new for new, old in enumerate(order)}
    relabeled = tuple(remap.get(v, -1) for v in labels)
    topic_ids = tuple(range(len(order)))
    counts = tuple(relabeled.count(t) for t in topic_ids)
    matrix = ctfidf(documents, relabeled, vocabulary)
    embeddings = _centroids(relabeled, topic_ids, np.asarray(doc_vectors, dtype=float))
    return TopicModel(
        assignments=relabeled,
        topic_ids=topic_ids,
        counts=counts,
        ctfidf=matrix,
        topic_embeddings=embeddings,
    )


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(a @ b / (na * nb))


def reduce_topics(
    model: TopicModel,
    max_topics: int,
    documents: list[Document],
    vocabulary: Vocabulary,
    doc_vectors: np.ndarray,
) -> TopicModel:
    """Merge the smallest topic into its nearest c-TF-IDF neighbour until the
    topic count is at most max_topics. A model already under the cap is
    returned unchanged."""
    if max_topics < 1:
        raise ValueError(f"max_topics must be >= 1, got {max_topics}")
    if model.n_topics <= max_topics:
        return model

    labels = list(model.assignments)
    matrix = model.ctfidf
    while True:
        topic_ids = list(matrix.topic_ids)
        if len(topic_ids) <= max_topics:
            break
        sizes = {t: labels.count(t) for t in topic_ids}
        # Smallest topic merges; ties broken toward the largest id.
        src = min(topic_ids, key=lambda t: (sizes[t], -t))
        src_row = matrix.row(src)
        best = None
        for t in topic_ids:
            if t == src:
                continue
            sim = _cosine(src_row, matrix.row(t))
            if best is None or sim > best[0] + 1e-15 or (abs(sim - best[0]) <= 1e-15 and t < best[1]):
                best = (sim, t)
        dst = best[1]
        labels = [dst if v == src else v for v in labels]
        matrix = ctfidf(documents, labels, vocabulary)

    return fit_topics(documents, labels, vocabulary, doc_vectors)


def topic_similarity(model: TopicModel, use_ctfidf: bool = False) -> np.ndarray:
    """Pairwise cosine similarity of topic embeddings (or c-TF-IDF rows)."""
    rows = model.ctfidf.weights if use_ctfidf else model.topic_embeddings
    norms = np.linalg.norm(rows, axis=1)
    if np.any(norms == 0.0):
        zero = int(np.argmin(norms))
        raise ValueError(f"topic {model.topic_ids[zero]} has a zero-norm embedding")
    unit = rows / norms[:, None]
    sim = unit @ unit.T
    np.fill_diagonal(sim, 1.0)
    return np.clip(sim, -1.0, 1.0)