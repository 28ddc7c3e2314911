import math

import numpy as np
import pytest

from cfconformal import (
    QuantileResult,
    ScoreDistribution,
    absolute_residual_score,
    empirical_quantile,
    weighted_quantile,
)


def oracle_weighted_quantile(scores, weights, infinity_mass, level):
    """Brute force: scan unique scores, return the smallest one whose total
    cumulative mass reaches the level. Independent of the implementation."""
    uniq = sorted(set(float(s) for s in scores))
    scores = np.asarray(scores, dtype=float)
    weights = np.asarray(weights, dtype=float)
    for s in uniq:
        mass = weights[scores <= s].sum()
        if mass >= level - 1e-9:
            return s
    return math.inf


class TestAbsoluteResidualScore:
    def test_basic(self):
        assert absolute_residual_score(3.0, 1.5) == 1.5
        assert absolute_residual_score(-2.0, 2.0) == 4.0
        assert absolute_residual_score(1.0, 1.0) == 0.0

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            absolute_residual_score(math.nan, 0.0)
        with pytest.raises(ValueError):
            absolute_residual_score(0.0, math.inf)


class TestEmpiricalQuantile:
    def test_split_conformal_level_hits_top_order_statistic(self):
        # 9 calibration scores at alpha = 0.1: level 0.9 * (1 + 1/9) = 1.0
        scores = np.arange(1.0, 10.0)
        res = empirical_quantile(scores, 0.9 * (1 + 1 / 9))
        assert res.value == 9.0

    def test_level_above_one_is_infinite(self):
        res = empirical_quantile([1.0, 2.0, 3.0], 1.2)
        assert res.value == math.inf
        assert res.level_used == 1.0

    def test_median_of_four(self):
        assert empirical_quantile([4.0, 2.0, 3.0, 1.0], 0.5).value == 2.0

    def test_level_one(self):
        assert empirical_quantile([5.0, 1.0, 3.0], 1.0).value == 5.0

    def test_tiny_level_returns_min(self):
        assert empirical_quantile([5.0, 1.0, 3.0], 1e-6).value == 1.0

    def test_attained_level(self):
        res = empirical_quantile([1.0, 2.0, 2.0, 4.0], 0.5)
        assert res.value == 2.0
        assert res.level_used == 0.75

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            empirical_quantile([], 0.5)
        with pytest.raises(ValueError):
            empirical_quantile([1.0, math.nan], 0.5)
        with pytest.raises(ValueError):
            empirical_quantile([1.0, 2.0], 0.0)
        with pytest.raises(ValueError):
            empirical_quantile([1.0, 2.0], -0.3)


class TestScoreDistribution:
    def test_normalize_sums_to_one(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            n = rng.integers(1, 40)
            raw = rng.exponential(size=n)
            raw_inf = float(rng.exponential())
            dist = ScoreDistribution.normalize(rng.uniform(0, 5, n), raw, raw_inf)
            assert abs(dist.finite_mass + dist.infinity_mass - 1.0) < 1e-9

    def test_rejects_negative_weight(self):
        with pytest.raises(ValueError):
            ScoreDistribution([1.0, 2.0], [0.5, -0.1])

    def test_rejects_oversum(self):
        with pytest.raises(ValueError):
            ScoreDistribution([1.0, 2.0], [0.7, 0.4])
        with pytest.raises(ValueError):
            ScoreDistribution([1.0], [0.5], infinity_mass=0.6)

    def test_subprobability_allowed(self):
        dist = ScoreDistribution([1.0, 2.0], [0.3, 0.3])
        assert dist.finite_mass == pytest.approx(0.6)

    def test_rejects_negative_scores(self):
        with pytest.raises(ValueError):
            ScoreDistribution([-1.0, 2.0], [0.5, 0.5])

    def test_rejects_nonfinite_scores(self):
        with pytest.raises(ValueError):
            ScoreDistribution([math.inf, 2.0], [0.5, 0.5])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            ScoreDistribution([], [])


class TestWeightedQuantile:
    def test_simple_weighted_case(self):
        dist = ScoreDistribution([1.0, 2.0, 3.0], [0.2, 0.3, 0.4], 0.1)
        assert weighted_quantile(dist, 0.5).value == 2.0
        assert weighted_quantile(dist, 0.2).value == 1.0
        assert weighted_quantile(dist, 0.9).value == 3.0

    def test_level_beyond_finite_mass_is_infinite(self):
        dist = ScoreDistribution([1.0, 2.0, 3.0], [0.2, 0.3, 0.4], 0.1)
        res = weighted_quantile(dist, 0.95)
        assert res.value == math.inf
        assert res.level_used == 1.0

    def test_all_mass_at_infinity(self):
        dist = ScoreDistribution([0.0], [0.0], 1.0)
        assert weighted_quantile(dist, 0.1).value == math.inf

    def test_dyadic_ties_match_oracle(self):
        # duplicated scores with exactly representable weights
        scores = [1.0, 1.0, 2.0, 2.0, 2.0, 5.0]
        weights = [0.125, 0.125, 0.0625, 0.25, 0.0625, 0.25]
        inf_mass = 0.125
        for level in (0.1, 0.125, 0.25, 0.3, 0.5, 0.625, 0.875, 0.9, 1.0):
            dist = ScoreDistribution(scores, weights, inf_mass)
            got = weighted_quantile(dist, level).value
            want = oracle_weighted_quantile(scores, weights, inf_mass, level)
            assert got == want, f"level={level}: {got} != {want}"

    def test_random_ties_match_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(300):
            n = int(rng.integers(1, 10))
            # few distinct values so ties are common
            scores = rng.integers(0, 4, n).astype(float)
            raw = rng.exponential(size=n)
            raw_inf = float(rng.exponential()) if rng.random() < 0.5 else 0.0
            dist = ScoreDistribution.normalize(scores, raw, raw_inf)
            level = float(rng.uniform(0.01, 1.0))
            got = weighted_quantile(dist, level).value
            want = oracle_weighted_quantile(
                dist.scores, dist.weights, dist.infinity_mass, level
            )
            assert got == want

    def test_monotone_in_level(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            n = int(rng.integers(1, 30))
            dist = ScoreDistribution.normalize(
                rng.uniform(0, 10, n),
                rng.exponential(size=n),
                float(rng.exponential()) if rng.random() < 0.3 else 0.0,
            )
            l1, l2 = sorted(rng.uniform(0.01, 1.0, 2))
            q1 = weighted_quantile(dist, float(l1)).value
            q2 = weighted_quantile(dist, float(l2)).value
            assert q1 <= q2

    def test_uniform_weights_reduce_to_empirical(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            n = int(rng.integers(1, 50))
            scores = rng.uniform(0, 10, n)
            level = float(rng.uniform(0.01, 1.0))
            dist = ScoreDistribution(scores, np.full(n, 1.0 / n))
            assert (
                weighted_quantile(dist, level).value
                == empirical_quantile(scores, level).value
            )

    def test_permutation_invariance(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            n = int(rng.integers(2, 30))
            scores = rng.uniform(0, 10, n)
            raw = rng.exponential(size=n)
            level = float(rng.uniform(0.05, 1.0))
            perm = rng.permutation(n)
            a = weighted_quantile(ScoreDistribution.normalize(scores, raw), level)
            b = weighted_quantile(
                ScoreDistribution.normalize(scores[perm], raw[perm]), level
            )
            assert a.value == b.value

    def test_rejects_nonpositive_level(self):
        dist = ScoreDistribution([1.0], [1.0])
        with pytest.raises(ValueError):
            weighted_quantile(dist, 0.0)

    def test_result_type(self):
        dist = ScoreDistribution([1.0], [1.0])
        assert isinstance(weighted_quantile(dist, 0.5), QuantileResult)
