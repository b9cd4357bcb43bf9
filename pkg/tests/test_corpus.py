from __future__ import annotations

import json

import pytest

from trendmap.corpus import (
    DEFAULT_STOPWORDS,
    Document,
    RawRecord,
    Stoplist,
    build_documents,
    build_periods,
    filter_records,
    merge_title_abstract,
    normalize_token,
    preprocess,
    read_corpus,
    read_stoplist,
)

EMPTY = Stoplist(frozenset())


def test_merge_both_parts():
    assert merge_title_abstract("Sonar survey", "We map reefs.") == "Sonar survey We map reefs."


def test_merge_empty_title():
    assert merge_title_abstract("", "We map reefs.") == "We map reefs."


def test_merge_empty_abstract():
    assert merge_title_abstract("Sonar survey", "") == "Sonar survey"


def _rec(id="r1", title="t", abstract="a", year=2010):
    return RawRecord(id=id, title=title, abstract=abstract, year=year)


def test_filter_drops_empty_abstract():
    full = _rec("a")
    empty = _rec("b", abstract="")
    assert filter_records([full, empty]) == [full]


def test_filter_empty_input():
    assert filter_records([]) == []


def test_filter_whitespace_only_title():
    assert filter_records([_rec(title="   ")]) == []


def test_filter_preserves_order_and_length():
    records = [_rec(str(i)) for i in range(5)]
    out = filter_records(records)
    assert out == records


def test_preprocess_lowercase_punctuation_digits():
    # "sensing" is normalized to "sens" by the suffix rules.
    assert preprocess("Underwater Sensing, 2021!", EMPTY) == ["underwater", "sens"]


def test_preprocess_suffix_rules_fixture():
    stop = Stoplist(frozenset({"the", "are"}))
    assert preprocess("the sensors are sensing", stop) == ["sensor", "sens"]


def test_preprocess_empty():
    assert preprocess("", EMPTY) == []


def test_preprocess_keeps_internal_hyphens():
    assert preprocess("state-of-the-art under-water", EMPTY) == ["state-of-the-art", "under-water"]


def test_preprocess_strips_edge_hyphens():
    assert preprocess("-edge- case-", EMPTY) == ["edge", "case"]


def test_preprocess_drops_pure_digits_keeps_mixed():
    assert preprocess("2021 3d 2021-2022", EMPTY) == ["3d", "2021-2022"]


@pytest.mark.parametrize(
    "token,expected",
    [
        ("studies", "study"),
        ("classes", "class"),
        ("glasses", "glass"),
        ("sensors", "sensor"),
        ("sensing", "sens"),
        ("class", "class"),
        ("sens", "sens"),
        ("red", "red"),
        ("speed", "spe"),
        ("cats", "cats"),  # stem "cat" is not longer than 3 chars
        ("boats", "boat"),
        ("network", "network"),
    ],
)
def test_normalize_token(token, expected):
    assert normalize_token(token) == expected


def test_normalize_token_idempotent_on_wordlist():
    words = [
        "studies", "classes", "glasses", "sensors", "sensing", "running",
        "used", "speed", "boats", "cats", "misses", "kisses", "aging",
        "applied", "babies", "gas", "s", "ss", "process", "processes",
    ]
    for w in words:
        once = normalize_token(w)
        assert normalize_token(once) == once, w


def test_preprocess_idempotent_property():
    import random

    rng = random.Random(3)
    vocab = [
        "sensors", "sensing", "studies", "networks", "the", "are", "2021",
        "deep-sea", "imaging", "processed", "classes", "buoys", "1234s",
        "acoustic", "Mapping", "USED", "signals!", "reefs,",
    ]
    stop = Stoplist(frozenset({"the", "are", "with"}))
    for _ in range(50):
        text = " ".join(rng.choice(vocab) for _ in range(rng.randint(0, 12)))
        once = preprocess(text, stop)
        again = preprocess(" ".join(once), stop)
        assert again == once


def test_build_periods_paper_fixture():
    scheme = build_periods(2004, 2021, 6)
    assert scheme.periods == ((2004, 2009), (2010, 2015), (2016, 2021))


def test_build_periods_single():
    assert build_periods(2000, 2001, 2).periods == ((2000, 2001),)


def test_build_periods_indivisible():
    with pytest.raises(ValueError, match="divisible"):
        build_periods(2004, 2021, 5)


def test_build_periods_covers_span_exactly():
    import random

    rng = random.Random(9)
    for _ in range(30):
        start = rng.randint(1900, 2020)
        width = rng.randint(1, 7)
        k = rng.randint(1, 6)
        scheme = build_periods(start, start + width * k - 1, width)
        years = [y for lo, hi in scheme.periods for y in range(lo, hi + 1)]
        assert years == list(range(start, start + width * k))


def test_read_corpus_ignores_unknown_fields(tmp_path):
    path = tmp_path / "c.ndjson"
    path.write_text(
        json.dumps({"id": "a", "title": "T", "abstract": "A", "year": 2010, "extra": 1}) + "\n"
    )
    records = read_corpus(path)
    assert records == [RawRecord("a", "T", "A", 2010)]


def test_read_corpus_duplicate_id(tmp_path):
    path = tmp_path / "c.ndjson"
    rows = [{"id": "a", "title": "T", "abstract": "A", "year": 2010}] * 2
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    with pytest.raises(ValueError, match="duplicate"):
        read_corpus(path)


def test_read_stoplist(tmp_path):
    path = tmp_path / "stop.txt"
    path.write_text("The\nof\n\nand\n")
    stop = read_stoplist(path)
    assert "the" in stop and "of" in stop and "and" in stop


def test_build_documents_drops_out_of_span_years():
    records = [
        _rec("a", "deep sonar", "acoustic mapping", 2010),
        _rec("b", "old paper", "ancient sonar work", 1999),
    ]
    docs, stats = build_documents(records, EMPTY, 2004, 2021)
    assert [d.id for d in docs] == ["a"]
    assert stats["year_dropped"] == 1


def test_build_documents_counts_blank_and_empty():
    records = [
        _rec("a", "sonar", "mapping reefs", 2010),
        _rec("b", "", "has abstract only", 2010),
        _rec("c", "the", "are", 2010),  # tokens all stoplisted away
    ]
    stop = Stoplist(frozenset({"the", "are"}))
    docs, stats = build_documents(records, stop, 2004, 2021)
    assert [d.id for d in docs] == ["a"]
    assert stats["blank_dropped"] == 1
    assert stats["empty_dropped"] == 1


def test_document_invariants_after_build():
    records = [_rec("a", "The Sensors; are sensing 2021", "Deep-sea IMAGING of 42 reefs", 2010)]
    docs, _ = build_documents(records, Stoplist(DEFAULT_STOPWORDS), 2004, 2021)
    (doc,) = docs
    assert doc.tokens
    for token in doc.tokens:
        assert token == token.lower()
        assert token not in DEFAULT_STOPWORDS
        assert not token.isdigit()


def test_determinism():
    text = "Sensors and Sensing: a deep-sea survey, 2004-2021 edition!"
    assert preprocess(text, Stoplist(DEFAULT_STOPWORDS)) == preprocess(text, Stoplist(DEFAULT_STOPWORDS))