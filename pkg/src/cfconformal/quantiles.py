"""Score distributions and the quantile conventions used by every interval rule.

Quantiles are the left-continuous inf type: the smallest score whose
cumulative probability mass reaches the requested level. Mass can sit at
+inf (the weight assigned to an unseen test point), in which case levels
above the finite mass return +inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Absorbs float dust when a level lands exactly on an order-statistic
# boundary, e.g. 0.9 * (1 + 1/9) evaluating to 1.0000000000000002.
LEVEL_SLACK = 1e-9

# Weight sums beyond this tolerance are rejected, never renormalized.
WEIGHT_TOL = 1e-9


def absolute_residual_score(y: float, y_hat: float) -> float:
    """Conformity score |y - y_hat|."""
    y = float(y)
    y_hat = float(y_hat)
    if not (math.isfinite(y) and math.isfinite(y_hat)):
        raise ValueError("absolute_residual_score requires finite inputs")
    return abs(y - y_hat)


@dataclass(frozen=True)
class QuantileResult:
    """Quantile value plus the probability mass actually attained at it."""

    value: float
    level_used: float


@dataclass(frozen=True)
class ScoreDistribution:
    """Discrete distribution over nonnegative scores, plus mass at +inf.

    weights and infinity_mass must form a subprobability vector; use
    `normalize` to build one that sums to 1 from raw nonnegative masses.
    """

    scores: np.ndarray
    weights: np.ndarray
    infinity_mass: float = 0.0

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "weights", weights)
        if scores.ndim != 1 or weights.ndim != 1:
            raise ValueError("scores and weights must be 1-d")
        if scores.size == 0:
            raise ValueError("scores must be nonempty")
        if scores.size != weights.size:
            raise ValueError("scores and weights length mismatch")
        if not np.isfinite(scores).all():
            raise ValueError("scores must be finite")
        if (scores < 0).any():
            raise ValueError("scores must be nonnegative")
        if not np.isfinite(weights).all():
            raise ValueError("weights must be finite")
        if (weights < 0).any():
            raise ValueError("weights must be nonnegative")
        if not (0.0 <= self.infinity_mass <= 1.0 + WEIGHT_TOL):
            raise ValueError("infinity_mass must lie in [0, 1]")
        total = float(weights.sum()) + float(self.infinity_mass)
        if total > 1.0 + WEIGHT_TOL:
            raise ValueError(f"weights + infinity_mass sum to {total}, above 1")

    @classmethod
    def normalize(cls, scores, raw_weights, raw_infinity_mass: float = 0.0):
        """Build a distribution by dividing raw nonnegative masses by their total."""
        raw = np.asarray(raw_weights, dtype=float)
        if (raw < 0).any() or raw_infinity_mass < 0:
            raise ValueError("raw masses must be nonnegative")
        total = float(raw.sum()) + float(raw_infinity_mass)
        if not math.isfinite(total) or total <= 0:
            raise ValueError("total raw mass must be positive and finite")
        return cls(scores, raw / total, raw_infinity_mass / total)

    @property
    def finite_mass(self) -> float:
        return float(self.weights.sum())


def empirical_quantile(scores, level: float) -> QuantileResult:
    """Level-quantile of the empirical distribution of `scores`.

    Returns the smallest score s with #{i: scores_i <= s} / n >= level.
    Levels above 1 (the finite-sample-corrected level can exceed it)
    yield +inf.
    """
    s = np.asarray(scores, dtype=float)
    if s.ndim != 1 or s.size == 0:
        raise ValueError("scores must be a nonempty 1-d array")
    if not np.isfinite(s).all():
        raise ValueError("scores must be finite")
    if level <= 0:
        raise ValueError("level must be positive")
    n = s.size
    k = math.ceil(n * level - LEVEL_SLACK)
    if k > n:
        return QuantileResult(math.inf, 1.0)
    s_sorted = np.sort(s)
    value = float(s_sorted[max(k, 1) - 1])
    attained = float(np.searchsorted(s_sorted, value, side="right")) / n
    return QuantileResult(value, attained)


def weighted_quantile(dist: ScoreDistribution, level: float) -> QuantileResult:
    """Level-quantile of a weighted score distribution with mass at +inf.

    Returns the smallest score whose cumulative weight reaches `level`;
    +inf when the finite mass is insufficient (the +inf atom always
    completes the distribution).
    """
    if level <= 0:
        raise ValueError("level must be positive")
    order = np.argsort(dist.scores, kind="stable")
    s = dist.scores[order]
    cum = np.cumsum(dist.weights[order])
    idx = int(np.searchsorted(cum, level - LEVEL_SLACK, side="left"))
    if idx >= s.size:
        return QuantileResult(math.inf, 1.0)
    value = float(s[idx])
    last = int(np.searchsorted(s, value, side="right")) - 1
    return QuantileResult(value, float(cum[last]))
