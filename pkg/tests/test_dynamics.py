from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_allclose

from oracles import ols_oracle
from trendmap.corpus import Document
from trendmap.dynamics import (
    TimeSeries,
    detect_peaks,
    ols_trend,
    time_sliced_ctfidf,
    yearly_proportions,
)
from trendmap.topics import build_vocabulary


def _doc(i, tokens, year):
    return Document(f"d{i}", tuple(tokens), year)


# --------------------------------------------------------------------------
# yearly proportions


def test_yearly_proportions_counting():
    docs = [_doc(0, ["a"], 2004), _doc(1, ["a"], 2004), _doc(2, ["b"], 2004)]
    series, empty = yearly_proportions([0, 0, 1], docs, 2004, 2004)
    assert series[0].proportions == (2 / 3,)
    assert series[1].proportions == (1 / 3,)
    assert empty == []


def test_yearly_proportions_all_noise_year_flagged():
    docs = [_doc(0, ["a"], 2004), _doc(1, ["a"], 2005)]
    series, empty = yearly_proportions([0, -1], docs, 2004, 2005)
    assert empty == [2005]
    assert series[0].proportions == (1.0, 0.0)


def test_yearly_proportions_single_topic():
    docs = [_doc(i, ["a"], 2004 + i) for i in range(3)]
    series, _ = yearly_proportions([0, 0, 0], docs, 2004, 2006)
    assert series[0].proportions == (1.0, 1.0, 1.0)


def test_yearly_proportions_columns_sum_to_one():
    rng = np.random.default_rng(10)
    docs = []
    labels = []
    for i in range(200):
        year = int(rng.integers(2004, 2010))
        docs.append(_doc(i, ["tok"], year))
        labels.append(int(rng.integers(-1, 4)))
    series, empty = yearly_proportions(labels, docs, 2004, 2009)
    for idx, year in enumerate(range(2004, 2010)):
        total = sum(series[t].proportions[idx] for t in series)
        if year in empty:
            assert total == 0.0
        else:
            assert abs(total - 1.0) < 1e-9


def test_yearly_proportions_years_contiguous():
    docs = [_doc(0, ["a"], 2006)]
    series, _ = yearly_proportions([0], docs, 2004, 2008)
    assert series[0].years == (2004, 2005, 2006, 2007, 2008)


# --------------------------------------------------------------------------
# time-sliced keywords


def test_time_sliced_burst_term_ranks_first():
    # Three docs: the 2020 slice of topic 0 is saturated with "iot", which no
    # other slice contains.
    docs = [
        _doc(0, ["iot", "iot", "sensor"], 2020),
        _doc(1, ["sensor", "signal"], 2019),
        _doc(2, ["signal", "sonar"], 2020),
    ]
    vocab = build_vocabulary(docs, 1)
    sliced = time_sliced_ctfidf(docs, [0, 0, 1], vocab)
    top = sliced[(0, 2020)]
    assert top[0][0] == "iot"


def test_time_sliced_single_doc_modal_token():
    docs = [
        _doc(0, ["alpha", "alpha", "beta"], 2010),
        _doc(1, ["gamma", "beta"], 2011),
    ]
    vocab = build_vocabulary(docs, 1)
    sliced = time_sliced_ctfidf(docs, [0, 0], vocab)
    assert sliced[(0, 2010)][0][0] == "alpha"


def test_time_sliced_empty_slice_omitted():
    docs = [_doc(0, ["alpha"], 2010), _doc(1, ["beta"], 2011)]
    vocab = build_vocabulary(docs, 1)
    sliced = time_sliced_ctfidf(docs, [0, 1], vocab)
    assert (0, 2011) not in sliced
    assert (1, 2010) not in sliced
    assert set(sliced) == {(0, 2010), (1, 2011)}


def test_time_sliced_local_idf_flag_changes_weights():
    docs = [
        _doc(0, ["alpha", "beta"], 2010),
        _doc(1, ["alpha", "gamma"], 2011),
        _doc(2, ["alpha", "beta", "gamma"], 2011),
    ]
    vocab = build_vocabulary(docs, 1)
    global_w = time_sliced_ctfidf(docs, [0, 0, 1], vocab)
    local_w = time_sliced_ctfidf(docs, [0, 0, 1], vocab, local_idf=True)
    assert set(global_w) == set(local_w)
    some_diff = any(
        dict(global_w[key]) != dict(local_w[key]) for key in global_w
    )
    assert some_diff


# --------------------------------------------------------------------------
# trend fitting


def _series(years, values, topic=0):
    return TimeSeries(topic=topic, years=tuple(years), proportions=tuple(values))


def test_ols_exact_fit():
    fit = ols_trend(_series([0, 1, 2], [1.0, 3.0, 5.0]))
    assert fit.slope == pytest.approx(2.0, abs=1e-12)
    assert fit.intercept == pytest.approx(1.0, abs=1e-12)
    assert_allclose(fit.fitted, [1.0, 3.0, 5.0], atol=1e-12)
    assert_allclose(fit.ci_half_width, [0.0, 0.0, 0.0], atol=1e-12)


def test_ols_constant_series():
    fit = ols_trend(_series([0, 1, 2, 3], [0.4] * 4))
    assert fit.slope == pytest.approx(0.0, abs=1e-15)
    assert fit.intercept == pytest.approx(0.4)


def test_ols_hand_fixture():
    fit = ols_trend(_series([0, 1, 2, 3], [0.0, 1.0, 0.0, 1.0]))
    assert fit.slope == pytest.approx(0.2, abs=1e-12)
    assert fit.intercept == pytest.approx(0.2, abs=1e-12)


def test_ols_matches_normal_equations_oracle():
    rng = np.random.default_rng(12)
    for _ in range(100):
        n = int(rng.integers(3, 25))
        years = np.arange(2004, 2004 + n)
        values = rng.uniform(0.0, 1.0, size=n)  # proportion-scale responses
        fit = ols_trend(_series(years, values))
        slope, intercept = ols_oracle(list(map(float, years)), list(map(float, values)))
        assert abs(fit.slope - slope) < 1e-10
        assert abs(fit.intercept - intercept) < 1e-10


def test_ols_ci_nonnegative_and_widens_at_edges():
    rng = np.random.default_rng(13)
    years = np.arange(2004, 2022)
    values = 0.01 * (years - 2004) + rng.normal(scale=0.02, size=len(years))
    fit = ols_trend(_series(years, values))
    widths = fit.ci_half_width
    assert all(w >= 0 for w in widths)
    mid = len(widths) // 2
    assert widths[0] > widths[mid]
    assert widths[-1] > widths[mid]


def test_ols_too_few_points():
    with pytest.raises(ValueError, match="at least 3"):
        ols_trend(_series([0, 1], [1.0, 2.0]))


def test_ols_zero_year_variance():
    with pytest.raises(ValueError, match="non-constant"):
        ols_trend(_series([5, 5, 5], [1.0, 2.0, 3.0]))


# --------------------------------------------------------------------------
# peaks


def test_detect_peaks_fixture():
    peaks = detect_peaks(_series(range(2004, 2009), [1, 3, 2, 5, 4]))
    assert peaks.peaks == ((2007, 5), (2005, 3))


def test_detect_peaks_increasing_endpoint():
    peaks = detect_peaks(_series(range(2004, 2009), [1, 2, 3, 4, 5]))
    assert peaks.peaks == ((2008, 5),)


def test_detect_peaks_constant_none():
    peaks = detect_peaks(_series(range(2004, 2009), [2, 2, 2, 2, 2]))
    assert peaks.peaks == ()


def test_detect_peaks_caps_and_orders():
    values = [0, 5, 0, 4, 0, 3, 0, 2, 0]
    peaks = detect_peaks(_series(range(2004, 2013), values))
    years = [y for y, _ in peaks.peaks]
    assert len(peaks.peaks) == 3
    assert years == sorted(years, reverse=True)
    assert peaks.peaks[0] == (2011, 2)


def test_detect_peaks_local_maximum_predicate():
    rng = np.random.default_rng(21)
    for _ in range(50):
        n = int(rng.integers(1, 15))
        values = [float(v) for v in rng.integers(0, 5, size=n)]
        years = list(range(2000, 2000 + n))
        peaks = detect_peaks(_series(years, values), max_peaks=99)
        for year, value in peaks.peaks:
            i = years.index(year)
            assert values[i] == value
            if i > 0:
                assert value > values[i - 1]
            if i < n - 1:
                assert value > values[i + 1]
            if n == 1:
                pytest.fail("lone point must not be a peak")