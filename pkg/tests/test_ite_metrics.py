"""Treatment-effect interval arithmetic and batch summaries."""

import math

import numpy as np
import pytest

from cfconformal.intervals import Interval
from cfconformal.ite import ITEInterval, bonferroni_ite
from cfconformal.metrics import WidthSummary, coverage, mean_width


def test_bonferroni_differences_endpoints():
    ite = bonferroni_ite(Interval(1.0, 3.0), Interval(-2.0, 0.5),
                         alpha_1=0.05, alpha_0=0.05)
    assert ite.lower == 0.5   # 1.0 - 0.5
    assert ite.upper == 5.0   # 3.0 - (-2.0)
    assert ite.alpha_1 == 0.05 and ite.alpha_0 == 0.05


def test_bonferroni_width_is_exactly_additive():
    # dyadic bounds keep every subtraction exact, so the identity
    # width(ite) = width(c1) + width(c0) holds bit for bit
    rng = np.random.default_rng(8)
    for _ in range(1000):
        a = np.sort(rng.integers(-4000, 4000, size=2)) / 16.0
        b = np.sort(rng.integers(-4000, 4000, size=2)) / 16.0
        c1 = Interval(a[0], a[1] + 1 / 16.0)
        c0 = Interval(b[0], b[1] + 1 / 16.0)
        ite = bonferroni_ite(c1, c0)
        assert ite.width == (c1.width + c0.width)


def test_bonferroni_width_additivity_on_continuous_inputs():
    rng = np.random.default_rng(9)
    for _ in range(200):
        a = np.sort(rng.normal(size=2) * 10)
        b = np.sort(rng.normal(size=2) * 10)
        c1 = Interval(a[0], a[1])
        c0 = Interval(b[0], b[1])
        ite = bonferroni_ite(c1, c0)
        assert ite.width == pytest.approx(c1.width + c0.width, rel=1e-12)


def test_bonferroni_simple_cases():
    ite = bonferroni_ite(Interval(1.0, 3.0), Interval(0.0, 1.0))
    assert (ite.lower, ite.upper) == (0.0, 3.0)
    same = bonferroni_ite(Interval(-2.0, 5.0), Interval(-2.0, 5.0))
    assert (same.lower, same.upper) == (-7.0, 7.0)


def test_bonferroni_contains_effect_when_arms_contain_outcomes():
    rng = np.random.default_rng(12)
    for _ in range(500):
        a = np.sort(rng.normal(size=2) * 5)
        b = np.sort(rng.normal(size=2) * 5)
        c1 = Interval(a[0], a[1])
        c0 = Interval(b[0], b[1])
        y1 = rng.uniform(c1.lower, c1.upper)
        y0 = rng.uniform(c0.lower, c0.upper)
        assert bonferroni_ite(c1, c0).contains(y1 - y0)


def test_bonferroni_propagates_infinities_without_nan():
    ite = bonferroni_ite(Interval(-math.inf, math.inf), Interval(0.0, 1.0))
    assert ite.lower == -math.inf and ite.upper == math.inf
    ite = bonferroni_ite(Interval(0.0, 1.0), Interval(-math.inf, math.inf))
    assert ite.lower == -math.inf and ite.upper == math.inf
    ite = bonferroni_ite(Interval(0.0, math.inf), Interval(0.0, 2.0))
    assert ite.lower == -2.0 and ite.upper == math.inf


def test_bonferroni_rejects_degenerate_infinite_arithmetic():
    # c1.lower and c0.upper both -inf would give NaN under IEEE rules
    with pytest.raises(ValueError, match="inf - inf"):
        bonferroni_ite(Interval(-math.inf, -math.inf), Interval(-math.inf, 0.0))


def test_ite_interval_validation():
    with pytest.raises(ValueError, match="NaN"):
        ITEInterval(math.nan, 0.0)
    with pytest.raises(ValueError, match="above"):
        ITEInterval(1.0, 0.0)
    iv = ITEInterval(-1.0, 1.0)
    assert iv.contains(1.0) and iv.contains(-1.0) and not iv.contains(1.01)


def test_coverage_counts_inclusive_hits():
    ivs = [Interval(0.0, 1.0), Interval(0.0, 1.0), Interval(0.0, 1.0),
           Interval(0.0, 1.0)]
    assert coverage(ivs, [0.0, 1.0, 0.5, 2.0]) == 0.75


def test_coverage_validation():
    ivs = [Interval(0.0, 1.0)]
    with pytest.raises(ValueError, match="intervals but"):
        coverage(ivs, [0.5, 0.5])
    with pytest.raises(ValueError, match="finite"):
        coverage(ivs, [math.inf])
    with pytest.raises(ValueError, match="empty"):
        coverage([], [])


def test_mean_width_finite_batch():
    ivs = [Interval(0.0, 1.0), Interval(0.0, 3.0)]
    s = mean_width(ivs)
    assert s == WidthSummary(mean=2.0, finite_mean=2.0, n_infinite=0)


def test_mean_width_with_infinite_intervals():
    ivs = [Interval(0.0, 1.0), Interval(-math.inf, math.inf)]
    s = mean_width(ivs)
    assert s.mean == math.inf
    assert s.finite_mean == 1.0
    assert s.n_infinite == 1
    all_inf = mean_width([Interval(-math.inf, math.inf)])
    assert math.isnan(all_inf.finite_mean)
    with pytest.raises(ValueError, match="empty"):
        mean_width([])
