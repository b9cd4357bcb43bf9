"""Topic emergence maps: per-period average proportion and growth rate,
four-quadrant signal classification, and the cross-period evolution matrix."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .dynamics import TimeSeries

__all__ = [
    "SignalClass",
    "TemPoint",
    "TemMap",
    "SignalEvolution",
    "period_metrics",
    "build_tem",
    "classify",
    "evolution_matrix",
]


class SignalClass(str, Enum):
    WEAK = "weak"
    STRONG = "strong"
    LATENT = "latent"
    NSWK = "nswk"
    NO_SIGNAL = "none"


@dataclass(frozen=True)
class TemPoint:
    topic: int
    avg_proportion: float
    growth_rate: float
    doc_count: int


@dataclass(frozen=True)
class TemMap:
    period: tuple[int, int]
    points: tuple[TemPoint, ...]
    x_threshold: float
    classes: tuple[SignalClass, ...]


@dataclass(frozen=True)
class SignalEvolution:
    periods: tuple[tuple[int, int], ...]
    topics: tuple[int, ...]
    matrix: dict[tuple[int, int], SignalClass]  # (topic, period index) -> class
    transitions: tuple[tuple[int, int, SignalClass, SignalClass], ...]

    def row(self, topic: int) -> list[SignalClass]:
        return [self.matrix[(topic, p)] for p in range(len(self.periods))]


def period_metrics(
    series_by_topic: dict[int, TimeSeries],
    doc_counts: dict[int, dict[int, int]],
    period: tuple[int, int],
) -> list[TemPoint]:
    """Average proportion (x) and mean year-over-year relative growth (y) per
    topic over the period's years.

    Growth averages (p[i+1] - p[i]) / p[i] over consecutive pairs with
    p[i] > 0; a pair rising from zero contributes the capped value +1; pairs
    flat at zero are skipped. Topics with no documents in the period are
    excluded entirely.
    """
    lo, hi = period
    points: list[TemPoint] = []
    for topic in sorted(series_by_topic):
        series = series_by_topic[topic]
        idx = [i for i, y in enumerate(series.years) if lo <= y <= hi]
        if not idx:
            continue
        count = sum(doc_counts.get(topic, {}).get(series.years[i], 0) for i in idx)
        if count == 0:
            continue
        props = [series.proportions[i] for i in idx]
        changes: list[float] = []
        for prev, nxt in zip(props, props[1:]):
            if prev > 0.0:
                changes.append((nxt - prev) / prev)
            elif nxt > 0.0:
                changes.append(1.0)
        growth = sum(changes) / len(changes) if changes else 0.0
        points.append(
            TemPoint(
                topic=topic,
                avg_proportion=sum(props) / len(props),
                growth_rate=growth,
                doc_count=count,
            )
        )
    return points


def classify(points: list[TemPoint] | tuple[TemPoint, ...]) -> tuple[float, tuple[SignalClass, ...]]:
    """Quadrant classes split at (mean of x values, growth 0).

    x >= mean counts as the high side, growth 0 as the non-positive side.
    """
    if not points:
        raise ValueError("classify requires at least one point")
    threshold = sum(p.avg_proportion for p in points) / len(points)
    classes = []
    for p in points:
        high_x = p.avg_proportion >= threshold
        growing = p.growth_rate > 0.0
        if high_x and growing:
            classes.append(SignalClass.STRONG)
        elif growing:
            classes.append(SignalClass.WEAK)
        elif high_x:
            classes.append(SignalClass.NSWK)
        else:
            classes.append(SignalClass.LATENT)
    return threshold, tuple(classes)


def build_tem(
    series_by_topic: dict[int, TimeSeries],
    doc_counts: dict[int, dict[int, int]],
    period: tuple[int, int],
) -> TemMap:
    points = period_metrics(series_by_topic, doc_counts, period)
    if points:
        threshold, classes = classify(points)
    else:
        threshold, classes = 0.0, ()
    return TemMap(period=period, points=tuple(points), x_threshold=threshold, classes=classes)


def evolution_matrix(maps: list[TemMap], topics: list[int] | tuple[int, ...]) -> SignalEvolution:
    """Signal class per (topic, period); NoSignal where a topic is absent.

    Also reports transitions: topics whose class changed between consecutive
    periods (NoSignal cells included, matching the emergence/disappearance
    reading of the evolution chart).
    """
    matrix: dict[tuple[int, int], SignalClass] = {}
    for p_idx, tem in enumerate(maps):
        by_topic = {pt.topic: cls for pt, cls in zip(tem.points, tem.classes)}
        for topic in topics:
            matrix[(topic, p_idx)] = by_topic.get(topic, SignalClass.NO_SIGNAL)

    transitions: list[tuple[int, int, SignalClass, SignalClass]] = []
    for topic in topics:
        for p_idx in range(1, len(maps)):
            before = matrix[(topic, p_idx - 1)]
            after = matrix[(topic, p_idx)]
            if before != after:
                transitions.append((topic, p_idx, before, after))
    return SignalEvolution(
        periods=tuple(t.period for t in maps),
        topics=tuple(topics),
        matrix=matrix,
        transitions=tuple(transitions),
    )