"""Document vectors: external embedding ingestion, a deterministic built-in
TF-IDF embedder, and PCA dimensionality reduction by deflated power iteration."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Document
from .topics import Vocabulary, term_counts

__all__ = [
    "EmbeddingMatrix",
    "PcaModel",
    "load_embeddings",
    "builtin_embed",
    "pca_fit_transform",
    "PROJECTION_DIM",
    "DEFAULT_PROJECTION_SEED",
]

PROJECTION_DIM = 256
DEFAULT_PROJECTION_SEED = 42

POWER_ITER_TOL = 1e-10
POWER_ITER_MAX = 1000


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Row-aligned dense document vectors.

    `zero_ids` flags documents that embedded to an exactly-zero row (no
    in-vocabulary tokens, or degenerate idf).
    """

    ids: tuple[str, ...]
    vectors: np.ndarray
    zero_ids: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.vectors.ndim != 2:
            raise ValueError("vectors must be a 2-D matrix")
        if self.vectors.shape[0] != len(self.ids):
            raise ValueError("row count does not match id count")


@dataclass(frozen=True)
class PcaModel:
    """Mean vector plus top-k principal axes (rows of `components`)."""

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray

    def transform(self, vectors: np.ndarray) -> np.ndarray:
        return (np.asarray(vectors, dtype=float) - self.mean) @ self.components.T


def load_embeddings(path: str | Path, expected_ids: list[str]) -> EmbeddingMatrix:
    """Read `{"id": ..., "vector": [...]}` NDJSON and align rows to expected_ids.

    Errors on missing/duplicate ids, ragged widths, or non-finite values.
    """
    rows: dict[str, list[float]] = {}
    width: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            doc_id = str(obj["id"])
            vec = obj["vector"]
            if doc_id in rows:
                raise ValueError(f"{path}:{lineno}: duplicate embedding id {doc_id!r}")
            if width is None:
                width = len(vec)
                if width < 1:
                    raise ValueError(f"{path}:{lineno}: empty vector for id {doc_id!r}")
            elif len(vec) != width:
                raise ValueError(
                    f"{path}:{lineno}: vector width {len(vec)} for id {doc_id!r} differs from {width}"
                )
            values = [float(v) for v in vec]
            if not all(math.isfinite(v) for v in values):
                raise ValueError(f"{path}:{lineno}: non-finite value in vector for id {doc_id!r}")
            rows[doc_id] = values
    missing = [i for i in expected_ids if i not in rows]
    if missing:
        raise ValueError(f"embedding file {path} is missing id {missing[0]!r} ({len(missing)} missing in total)")
    matrix = np.array([rows[i] for i in expected_ids], dtype=float)
    return EmbeddingMatrix(ids=tuple(expected_ids), vectors=matrix)


def builtin_embed(
    documents: list[Document],
    vocabulary: Vocabulary,
    seed: int = DEFAULT_PROJECTION_SEED,
) -> EmbeddingMatrix:
    """TF-IDF vectors over the vocabulary, unit-normalized, sign-projected to
    256 dims when the vocabulary is larger than that.

    idf = ln(N / df). Documents with no weight anywhere come out as exact zero
    rows and are flagged via `zero_ids`.
    """
    n_docs = len(documents)
    n_terms = len(vocabulary.terms)
    idf = np.log(n_docs / np.asarray(vocabulary.df, dtype=float))
    matrix = np.zeros((n_docs, n_terms), dtype=float)
    for row, doc in enumerate(documents):
        for term, count in term_counts(doc.tokens, vocabulary).items():
            col = vocabulary.index[term]
            matrix[row, col] = count * idf[col]
    matrix = _l2_normalize_rows(matrix)

    if n_terms > PROJECTION_DIM:
        rng = np.random.default_rng(seed)
        signs = rng.choice(np.array([-1.0, 1.0]), size=(n_terms, PROJECTION_DIM))
        matrix = _l2_normalize_rows(matrix @ signs)

    norms = np.linalg.norm(matrix, axis=1)
    zero_ids = tuple(doc.id for doc, nrm in zip(documents, norms) if nrm == 0.0)
    return EmbeddingMatrix(ids=tuple(d.id for d in documents), vectors=matrix, zero_ids=zero_ids)


def _l2_normalize_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)
    return matrix / safe


def pca_fit_transform(m: EmbeddingMatrix, k: int) -> tuple[PcaModel, EmbeddingMatrix]:
    """Project rows onto the top-k principal axes of the mean-centered data.

    Axes are found one at a time by power iteration with deflation; each
    iterate is re-orthogonalized against the axes already found, so the
    returned components are orthonormal even for degenerate spectra. The
    start vector is the normalized all-ones vector (canonical basis vectors
    are tried as deterministic fallbacks if that start has no overlap with
    the remaining spectrum).
    """
    X = np.asarray(m.vectors, dtype=float)
    n, d = X.shape
    if not (1 <= k <= min(n, d)):
        raise ValueError(f"k={k} out of range for a {n}x{d} matrix")
    mean = X.mean(axis=0)
    centered = X - mean
    if n > 1:
        cov = centered.T @ centered / (n - 1)
    else:
        cov = np.zeros((d, d))

    components = np.zeros((k, d))
    variances = np.zeros(k)
    A = cov.copy()
    for idx in range(k):
        v = _power_iterate(A, components[:idx])
        lam = float(v @ A @ v)
        if lam < 0.0:
            lam = 0.0
        components[idx] = v
        variances[idx] = lam
        A = A - lam * np.outer(v, v)

    model = PcaModel(mean=mean, components=components, explained_variance=variances)
    reduced = EmbeddingMatrix(ids=m.ids, vectors=centered @ components.T, zero_ids=m.zero_ids)
    return model, reduced


def _power_iterate(A: np.ndarray, previous: np.ndarray) -> np.ndarray:
    d = A.shape[0]
    starts = [np.ones(d)]
    starts.extend(np.eye(d))
    quiet: np.ndarray | None = None
    for start in starts:
        v = _orthonormalize(start, previous)
        if v is None:
            continue
        if np.linalg.norm(A @ v) <= 1e-300:
            # No overlap with the remaining spectrum from this start; remember
            # it as a zero-eigenvalue axis and try the next start.
            if quiet is None:
                quiet = v
            continue
        for _ in range(POWER_ITER_MAX):
            w = A @ v
            w_orth = _orthonormalize(w, previous)
            if w_orth is None:
                break
            if min(np.linalg.norm(w_orth - v), np.linalg.norm(w_orth + v)) < POWER_ITER_TOL:
                return w_orth
            v = w_orth
        return v
    if quiet is not None:
        return quiet
    # Every start collapsed under orthogonalization (only possible when
    # previous already spans the space); keep a deterministic unit vector.
    return np.ones(d) / math.sqrt(d)


def _orthonormalize(v: np.ndarray, previous: np.ndarray) -> np.ndarray | None:
    v = v.astype(float)
    if len(previous):
        v = v - previous.T @ (previous @ v)
        # Second pass guards against catastrophic cancellation.
        v = v - previous.T @ (previous @ v)
    norm = np.linalg.norm(v)
    if norm <= 1e-300:
        return None
    return v / norm
