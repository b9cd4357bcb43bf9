"""Temporal topic evolution: yearly proportion series, time-sliced topic
keywords, OLS trend lines with 95% confidence bands, and peak detection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .corpus import Document
from .topics import Vocabulary, term_counts

__all__ = [
    "TimeSeries",
    "TrendFit",
    "PeakSet",
    "yearly_proportions",
    "time_sliced_ctfidf",
    "ols_trend",
    "detect_peaks",
]


@dataclass(frozen=True)
class TimeSeries:
    topic: int
    years: tuple[int, ...]
    proportions: tuple[float, ...]


@dataclass(frozen=True)
class TrendFit:
    slope: float
    intercept: float
    fitted: tuple[float, ...]
    ci_half_width: tuple[float, ...]


@dataclass(frozen=True)
class PeakSet:
    topic: int
    peaks: tuple[tuple[int, float], ...]  # (year, value), most recent first


def yearly_proportions(
    assignments: list[int] | tuple[int, ...],
    documents: list[Document],
    start_year: int,
    end_year: int,
) -> tuple[dict[int, TimeSeries], list[int]]:
    """Per-topic share of non-noise documents per year over the full span.

    Years with no non-noise documents contribute 0 to every topic and are
    returned in the flagged list.
    """
    years = list(range(start_year, end_year + 1))
    topics = sorted(set(assignments) - {-1})
    totals = {y: 0 for y in years}
    counts = {(t, y): 0 for t in topics for y in years}
    for doc, label in zip(documents, assignments):
        if label == -1:
            continue
        if doc.year < start_year or doc.year > end_year:
            raise ValueError(f"document {doc.id!r} year {doc.year} outside [{start_year}, {end_year}]")
        totals[doc.year] += 1
        counts[(label, doc.year)] += 1

    empty_years = [y for y in years if totals[y] == 0]
    series: dict[int, TimeSeries] = {}
    for t in topics:
        props = tuple(
            counts[(t, y)] / totals[y] if totals[y] else 0.0 for y in years
        )
        series[t] = TimeSeries(topic=t, years=tuple(years), proportions=props)
    return series, empty_years


def time_sliced_ctfidf(
    documents: list[Document],
    assignments: list[int] | tuple[int, ...],
    vocabulary: Vocabulary,
    top_n: int = 3,
    local_idf: bool = False,
) -> dict[tuple[int, int], list[tuple[str, float]]]:
    """Top terms per (topic, year) slice using slice-local term frequencies.

    By default the idf factor reuses the global per-term counts and the global
    mean class token total, keeping weights comparable across years;
    local_idf=True recomputes both over the slices instead. Empty slices are
    omitted.
    """
    slice_docs: dict[tuple[int, int], list[Document]] = {}
    global_totals: dict[int, int] = {}
    n_terms = len(vocabulary.terms)
    global_counts = np.zeros(n_terms)
    for doc, label in zip(documents, assignments):
        if label == -1:
            continue
        slice_docs.setdefault((label, doc.year), []).append(doc)
        global_totals[label] = global_totals.get(label, 0) + len(doc.tokens)
        for term, count in term_counts(doc.tokens, vocabulary).items():
            global_counts[vocabulary.index[term]] += count
    if not slice_docs:
        raise ValueError("time_sliced_ctfidf requires at least one non-noise document")

    slice_counts: dict[tuple[int, int], np.ndarray] = {}
    slice_totals: dict[tuple[int, int], int] = {}
    for key, docs in slice_docs.items():
        counts = np.zeros(n_terms)
        total = 0
        for doc in docs:
            total += len(doc.tokens)
            for term, count in term_counts(doc.tokens, vocabulary).items():
                counts[vocabulary.index[term]] += count
        slice_counts[key] = counts
        slice_totals[key] = total

    if local_idf:
        f_t = sum(slice_counts.values())
        avg_tokens = float(np.mean(list(slice_totals.values())))
    else:
        f_t = global_counts
        avg_tokens = float(np.mean(list(global_totals.values())))
    idf = np.zeros(n_terms)
    seen = f_t > 0
    idf[seen] = np.log1p(avg_tokens / f_t[seen])

    result: dict[tuple[int, int], list[tuple[str, float]]] = {}
    for key in sorted(slice_counts):
        weights = (slice_counts[key] / slice_totals[key]) * idf
        ranked = [(vocabulary.terms[i], float(w)) for i, w in enumerate(weights) if w > 0.0]
        ranked.sort(key=lambda tw: (-tw[1], tw[0]))
        result[key] = ranked[:top_n]
    return result


def ols_trend(series: TimeSeries) -> TrendFit:
    """Simple linear regression of proportion on year with a 95% CI band for
    the mean response (t-distribution, n-2 degrees of freedom)."""
    x = np.asarray(series.years, dtype=float)
    y = np.asarray(series.proportions, dtype=float)
    n = len(x)
    if n < 3:
        raise ValueError(f"ols_trend needs at least 3 points, got {n}")
    x_mean = x.mean()
    y_mean = y.mean()
    sxx = float(((x - x_mean) ** 2).sum())
    if sxx == 0.0:
        raise ValueError("ols_trend requires non-constant years")
    sxy = float(((x - x_mean) * (y - y_mean)).sum())
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean
    fitted = intercept + slope * x
    sse = float(((y - fitted) ** 2).sum())
    s = np.sqrt(sse / (n - 2))
    t_crit = float(stats.t.ppf(0.975, n - 2))
    half_width = t_crit * s * np.sqrt(1.0 / n + (x - x_mean) ** 2 / sxx)
    return TrendFit(
        slope=float(slope),
        intercept=float(intercept),
        fitted=tuple(float(v) for v in fitted),
        ci_half_width=tuple(float(v) for v in half_width),
    )


def detect_peaks(series: TimeSeries, max_peaks: int = 3) -> PeakSet:
    """Strict local maxima, most recent first, capped at max_peaks.

    An endpoint counts when it strictly exceeds its single neighbour.
    """
    if not series.years:
        raise ValueError("detect_peaks needs at least 1 point")
    values = series.proportions
    years = series.years
    n = len(values)
    peaks: list[tuple[int, float]] = []
    for i in range(n - 1, -1, -1):
        left_ok = i == 0 or values[i] > values[i - 1]
        right_ok = i == n - 1 or values[i] > values[i + 1]
        if n == 1:
            break  # a lone point has no neighbour to exceed
        if left_ok and right_ok:
            peaks.append((years[i], values[i]))
            if len(peaks) == max_peaks:
                break
    return PeakSet(topic=series.topic, peaks=tuple(peaks))