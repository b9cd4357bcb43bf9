"""Corpus ingestion: record filtering, text normalization, and period schemes."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

__all__ = [
    "RawRecord",
    "Document",
    "Stoplist",
    "PeriodScheme",
    "DEFAULT_STOPWORDS",
    "merge_title_abstract",
    "filter_records",
    "normalize_token",
    "preprocess",
    "build_periods",
    "read_corpus",
    "read_stoplist",
    "build_documents",
]

# Fixed default stoplist (~180 common English function words). Callers may
# substitute their own list; membership is exact string match on lowercased,
# punctuation-stripped tokens.
DEFAULT_STOPWORDS: frozenset[str] = frozenset("""
a about above after again against all along also although always am among an
and another any anyone anything are around as at be because been before being
below between beyond both but by can cannot could did do does doing down
during each either else etc even ever every few for from had has have having
he her here hers herself him himself his how however i if in into is it its
itself just less many may me might more most much must my myself neither
never no nor not nothing now of off often on once one only onto or other
others our ours ourselves out over own per rather same she should since so
some someone something still such than that the their theirs them themselves
then there therefore these they this those though through throughout thus to
together too toward towards under until up upon us use used using very was we
well were what whatever when where whether which while who whom whose why
will with within without would yet you your yours yourself yourselves
""".split())


@dataclass(frozen=True)
class RawRecord:
    """One publication as ingested: identifier, title, abstract, year."""

    id: str
    title: str
    abstract: str
    year: int


@dataclass(frozen=True)
class Document:
    """A normalized publication: ordered lowercase tokens plus its year."""

    id: str
    tokens: tuple[str, ...]
    year: int


@dataclass(frozen=True)
class Stoplist:
    terms: frozenset[str]

    def __contains__(self, token: str) -> bool:
        return token in self.terms


@dataclass(frozen=True)
class PeriodScheme:
    """Contiguous, equal-width, inclusive year ranges covering a span."""

    start_year: int
    end_year: int
    width_years: int
    periods: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        if not self.periods:
            object.__setattr__(self, "periods", _split_periods(self.start_year, self.end_year, self.width_years))


def merge_title_abstract(title: str, abstract: str) -> str:
    """Join title and abstract with one space; an empty part is dropped."""
    if not title:
        return abstract
    if not abstract:
        return title
    return f"{title} {abstract}"


def filter_records(records: list[RawRecord]) -> list[RawRecord]:
    """Keep records whose title and abstract are both non-blank after trimming."""
    return [r for r in records if r.title.strip() and r.abstract.strip()]


_VOWELS = set("aeiou")

# Tokens are maximal runs of letters/digits joined by single internal hyphens.
# Underscore is excluded from \w by the character class.
_TOKEN_RE = re.compile(r"[^\W_]+(?:-[^\W_]+)*", re.UNICODE)


def normalize_token(token: str) -> str:
    """Rule-based suffix stripper standing in for a lemmatizer.

    Applies at most one rule, in order: "ies"->"y"; "sses"->"ss"; drop a
    trailing "s" when the stem stays longer than 3 chars and the token does
    not end in "ss"; drop "ing"/"ed" when a vowel remains in the stem.
    Idempotent: re-normalizing any output is a no-op.
    """
    if token.endswith("ies"):
        return token[:-3] + "y"
    if token.endswith("sses"):
        return token[:-2]
    if token.endswith("s") and not token.endswith("ss") and len(token) - 1 > 3:
        return token[:-1]
    for suffix in ("ing", "ed"):
        if token.endswith(suffix):
            stem = token[: -len(suffix)]
            if _VOWELS & set(stem):
                return stem
    return token


def preprocess(text: str, stoplist: Stoplist) -> list[str]:
    """Lowercase, strip punctuation, tokenize, drop stopwords/digits, normalize.

    The stoplist and pure-digit filters run both before and after suffix
    normalization so the output re-tokenizes to itself.
    """
    out: list[str] = []
    for raw in _TOKEN_RE.findall(text.lower()):
        if raw in stoplist or raw.isdigit():
            continue
        token = normalize_token(raw)
        if token in stoplist or token.isdigit():
            continue
        out.append(token)
    return out


def _split_periods(start_year: int, end_year: int, width: int) -> tuple[tuple[int, int], ...]:
    span = end_year - start_year + 1
    if width < 1:
        raise ValueError(f"period width must be >= 1, got {width}")
    if span < 1:
        raise ValueError(f"empty year span [{start_year}, {end_year}]")
    if span % width != 0:
        raise ValueError(f"span of {span} years [{start_year}, {end_year}] is not divisible by width {width}")
    return tuple((lo, lo + width - 1) for lo in range(start_year, end_year + 1, width))


def build_periods(start_year: int, end_year: int, width: int) -> PeriodScheme:
    """Split [start_year, end_year] into contiguous inclusive ranges of `width` years."""
    return PeriodScheme(start_year, end_year, width, _split_periods(start_year, end_year, width))


def read_corpus(path: str | Path) -> list[RawRecord]:
    """Read newline-delimited JSON records; unknown fields are ignored.

    Raises ValueError for malformed lines, missing fields, or duplicate ids.
    """
    records: list[RawRecord] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            try:
                rec = RawRecord(
                    id=str(obj["id"]),
                    title=str(obj.get("title") or ""),
                    abstract=str(obj.get("abstract") or ""),
                    year=int(obj["year"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad record: {exc}") from exc
            if rec.id in seen:
                raise ValueError(f"{path}:{lineno}: duplicate record id {rec.id!r}")
            seen.add(rec.id)
            records.append(rec)
    return records


def read_stoplist(path: str | Path) -> Stoplist:
    """Read a stoplist file: one term per line, UTF-8, blank lines skipped."""
    terms = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            term = line.strip().lower()
            if term:
                terms.add(term)
    return Stoplist(frozenset(terms))


def build_documents(
    records: list[RawRecord],
    stoplist: Stoplist,
    start_year: int,
    end_year: int,
) -> tuple[list[Document], dict[str, int]]:
    """Filter, merge, and tokenize records into Documents within the year span.

    Returns the documents plus ingest counters: records dropped for blank
    title/abstract, dropped for an out-of-span year, and dropped because no
    tokens survived preprocessing.
    """
    kept = filter_records(records)
    stats = {
        "ingested": len(records),
        "blank_dropped": len(records) - len(kept),
        "year_dropped": 0,
        "empty_dropped": 0,
    }
    documents: list[Document] = []
    for rec in kept:
        if rec.year < start_year or rec.year > end_year:
            stats["year_dropped"] += 1
            continue
        tokens = preprocess(merge_title_abstract(rec.title, rec.abstract), stoplist)
        if not tokens:
            stats["empty_dropped"] += 1
            continue
        documents.append(Document(id=rec.id, tokens=tuple(tokens), year=rec.year))
    stats["documents"] = len(documents)
    return documents, stats
