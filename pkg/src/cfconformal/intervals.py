"""Conformal interval constructions for counterfactual outcomes.

Four families, all returning two-sided intervals for Y(t) at a query point:

- split conformal on exchangeable data (`scp_interval`), and its
  interventional-data-only application (`naive_interval`);
- transductive conformal, unweighted (`tcp_interval`) and weighted by a
  density-ratio model (`wtcp_dr_interval`), which refit the base model per
  candidate outcome on a grid and collect the accepted candidates;
- the two-stage construction (`wscp_dr_first_stage` + inexact/exact second
  stages) that first builds weighted intervals at interventional samples,
  then regresses their endpoints;
- propensity-weighted split conformal (`wcp_propensity_interval`), which
  reweights by inverse treatment probability and ignores outcome shift.

Weighted methods place the test point's normalized weight as a point mass
at +infinity, so their quantiles are taken at level 1 - alpha; unweighted
split methods use the (1 - alpha)(1 + 1/n) finite-sample correction.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .density import RatioModel, normalized_weights
from .models import RegressorSpec, design_matrix, fit_classifier, fit_regressor
from .quantiles import (
    LEVEL_SLACK,
    ScoreDistribution,
    empirical_quantile,
    weighted_quantile,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Interval:
    lower: float
    upper: float

    def __post_init__(self):
        lower = float(self.lower)
        upper = float(self.upper)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if math.isnan(lower) or math.isnan(upper):
            raise ValueError("interval bounds must not be NaN")
        if lower > upper:
            raise ValueError(f"lower bound {lower} above upper bound {upper}")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, v: float) -> bool:
        return self.lower <= v <= self.upper


@dataclass(frozen=True)
class YGrid:
    """Uniform candidate-outcome grid for the transductive methods."""

    lo: float
    hi: float
    n_points: int = 200

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("grid bounds must be finite")
        if self.lo >= self.hi:
            raise ValueError("grid lower bound must be below upper bound")
        if self.n_points < 2:
            raise ValueError("grid needs at least 2 points")

    @classmethod
    def from_outcomes(cls, y, n_points: int = 200, margin: float = 0.25) -> "YGrid":
        """Observed outcome range padded by `margin` times its span."""
        y = np.asarray(y, dtype=float)
        lo = float(y.min())
        hi = float(y.max())
        span = hi - lo
        if span == 0:
            span = 1.0
        return cls(lo - margin * span, hi + margin * span, n_points)

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n_points)

    def widened(self, factor: float = 2.0) -> "YGrid":
        center = 0.5 * (self.lo + self.hi)
        half = 0.5 * (self.hi - self.lo) * factor
        return YGrid(center - half, center + half, self.n_points)


@dataclass(frozen=True)
class TransductiveResult:
    """Accepted grid values and their hull; empty acceptance is flagged."""

    accepted: np.ndarray
    hull: Interval | None

    @property
    def is_empty(self) -> bool:
        return self.hull is None


@dataclass(frozen=True)
class FirstStageIntervals:
    """Per-interventional-sample intervals from the first weighted stage."""

    X: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        if not (len(self.X) == len(self.lower) == len(self.upper)):
            raise ValueError("first-stage arrays must have equal length")
        if np.isnan(self.lower).any() or np.isnan(self.upper).any():
            raise ValueError("first-stage bounds must not be NaN")
        if (self.lower > self.upper).any():
            raise ValueError("first-stage lower bounds must not exceed uppers")

    @property
    def n(self) -> int:
        return len(self.lower)

    @property
    def n_infinite(self) -> int:
        return int((~np.isfinite(self.lower) | ~np.isfinite(self.upper)).sum())


def _check_alpha(alpha):
    if not (0 < alpha < 1):
        raise ValueError("alpha must lie in (0, 1)")


def _test_batch(x_test, dim):
    x = np.asarray(x_test, dtype=float)
    if x.ndim == 1:
        if x.shape[0] != dim:
            raise ValueError(f"expected test vector of length {dim}")
        return x[None, :], True
    if x.ndim == 2 and x.shape[1] == dim:
        return x, False
    raise ValueError(f"expected test points with {dim} features")


def _interval_from_center(mu: float, q: float) -> Interval:
    if math.isinf(q):
        return Interval(-math.inf, math.inf)
    return Interval(mu - q, mu + q)


def scp_interval(train: Dataset, cal: Dataset, x_test, alpha: float,
                 spec: RegressorSpec):
    """Split conformal: fit on train, calibrate absolute residuals on cal.

    Valid when calibration and test data are exchangeable; the quantile
    level carries the (1 + 1/n) correction and an infinite quantile yields
    the whole real line.
    """
    _check_alpha(alpha)
    if cal.n < 1:
        raise ValueError("calibration set is empty")
    model = fit_regressor(train.X, train.y, spec)
    scores = np.abs(cal.y - model.predict(cal.X))
    level = (1.0 - alpha) * (1.0 + 1.0 / cal.n)
    q = empirical_quantile(scores, level).value
    X, single = _test_batch(x_test, train.dim)
    mu = np.atleast_1d(model.predict(X))
    out = [_interval_from_center(float(m), q) for m in mu]
    return out[0] if single else out


def _index_split(n: int, fraction: float):
    if n < 2:
        raise ValueError("need at least 2 samples to split")
    if not (0 < fraction < 1):
        raise ValueError("split_fraction must lie in (0, 1)")
    k = int(math.floor(n * fraction))
    k = min(max(k, 1), n - 1)
    return k


def naive_interval(intr: Dataset, x_test, alpha: float, spec: RegressorSpec,
                   split_fraction: float = 0.5):
    """Split conformal using interventional data only (index split; shuffle
    beforehand if the rows are ordered)."""
    k = _index_split(intr.n, split_fraction)
    idx = np.arange(intr.n)
    return scp_interval(intr.take(idx[:k]), intr.take(idx[k:]), x_test, alpha, spec)


def _ratio_at(ratio_model: RatioModel, X, y):
    if ratio_model.uses_outcome:
        return np.atleast_1d(ratio_model.ratio(X, y))
    return np.atleast_1d(ratio_model.ratio(X))


def _transductive_scores(obs_X, obs_y, x_test, grid_values, spec, force_generic):
    """Conformity scores of observational rows and the test row, per grid
    candidate. Returns (scores matrix (g, n), test scores (g,)).

    Ridge base models admit a closed form: the augmented-fit coefficients
    are affine in the candidate outcome, so one factorization covers the
    whole grid. Equality with the per-candidate refit is exercised in tests.
    """
    n = len(obs_y)
    g = len(grid_values)
    if spec.kind == "ridge" and not force_generic:
        X_aug = np.vstack([obs_X, x_test[None, :]])
        Phi = design_matrix(X_aug, spec.feature_map)
        p = Phi.shape[1]
        if spec.ridge_penalty == 0 and np.linalg.matrix_rank(Phi) < p:
            raise ValueError("singular normal equations with zero ridge penalty")
        gram = Phi.T @ Phi + spec.ridge_penalty * np.eye(p)
        theta0 = np.linalg.solve(gram, Phi[:-1].T @ obs_y)
        theta1 = np.linalg.solve(gram, Phi[-1])
        base = Phi @ theta0
        slope = Phi @ theta1
        # row i, candidate k: |y_i - (base_i + slope_i * ybar_k)|
        preds = base[None, :] + np.outer(grid_values, slope)
        scores = np.abs(
            np.concatenate([obs_y, [0.0]])[None, :] - preds
        )
        scores[:, -1] = np.abs(grid_values - preds[:, -1])
        return scores[:, :-1], scores[:, -1]
    scores = np.empty((g, n))
    test_scores = np.empty(g)
    X_aug = np.vstack([obs_X, x_test[None, :]])
    y_aug = np.empty(n + 1)
    y_aug[:n] = obs_y
    for k, ybar in enumerate(grid_values):
        y_aug[n] = ybar
        model = fit_regressor(X_aug, y_aug, spec)
        mu = model.predict(X_aug)
        scores[k] = np.abs(obs_y - mu[:n])
        test_scores[k] = abs(ybar - mu[n])
    return scores, test_scores


def _transductive(obs: Dataset, ratio_model, x_test, alpha, grid, spec,
                  force_generic=False) -> TransductiveResult:
    _check_alpha(alpha)
    x, single = _test_batch(x_test, obs.dim)
    if not single:
        raise ValueError("transductive methods take one test point per call")
    x = x[0]
    grid_values = grid.values()
    scores, test_scores = _transductive_scores(
        obs.X, obs.y, x, grid_values, spec, force_generic
    )
    if ratio_model is None:
        r_obs = np.ones(obs.n)
        r_test = np.ones(len(grid_values))
    else:
        r_obs = _ratio_at(ratio_model, obs.X, obs.y)
        r_test = _ratio_at(
            ratio_model, np.tile(x, (len(grid_values), 1)), grid_values
        )
    accepted = []
    for k, ybar in enumerate(grid_values):
        w = normalized_weights(r_obs, float(r_test[k]))
        dist = ScoreDistribution(scores[k], w.obs_weights, w.test_weight)
        q = weighted_quantile(dist, 1.0 - alpha).value
        if test_scores[k] <= q:
            accepted.append(ybar)
    accepted = np.asarray(accepted)
    if accepted.size == 0:
        return TransductiveResult(accepted, None)
    return TransductiveResult(
        accepted, Interval(float(accepted.min()), float(accepted.max()))
    )


def tcp_interval(data: Dataset, x_test, alpha: float, grid: YGrid,
                 spec: RegressorSpec, force_generic: bool = False) -> TransductiveResult:
    """Transductive conformal on exchangeable data: a candidate outcome is
    accepted when its refit conformity score stays below the augmented
    empirical quantile (which reserves 1/(n+1) mass at +infinity)."""
    return _transductive(data, None, x_test, alpha, grid, spec, force_generic)


def wtcp_dr_interval(obs: Dataset, ratio_model: RatioModel, x_test, alpha: float,
                     grid: YGrid, spec: RegressorSpec,
                     force_generic: bool = False) -> TransductiveResult:
    """Weighted transductive conformal with a density-ratio model.

    Observational rows are reweighted by their estimated ratio; the test
    candidate's normalized ratio becomes the point mass at +infinity."""
    if ratio_model is None:
        raise ValueError("ratio_model is required; use tcp_interval otherwise")
    return _transductive(obs, ratio_model, x_test, alpha, grid, spec, force_generic)


def wscp_dr_first_stage(obs: Dataset, intr: Dataset, ratio_model: RatioModel,
                        alpha: float, spec: RegressorSpec, *,
                        shared_fit: bool = False,
                        train: Dataset | None = None) -> FirstStageIntervals:
    """Weighted intervals at each interventional sample (first stage).

    Default refits the base model per interventional sample on the scored
    rows plus that sample. `train` separates fit data from scored data;
    `shared_fit=True` fits once (on `train` if given, else on `obs`), which
    changes only the score vector, not the weighting.
    """
    _check_alpha(alpha)
    if intr.n < 1:
        raise ValueError("no interventional samples")
    if obs.dim != intr.dim:
        raise ValueError("dimension mismatch between datasets")
    r_obs = _ratio_at(ratio_model, obs.X, obs.y)
    r_int = _ratio_at(ratio_model, intr.X, intr.y)

    lower = np.empty(intr.n)
    upper = np.empty(intr.n)
    fit_X = obs.X if train is None else train.X
    fit_y = obs.y if train is None else train.y
    if shared_fit:
        model = fit_regressor(fit_X, fit_y, spec)
        scores = np.abs(obs.y - model.predict(obs.X))
        mu_int = np.atleast_1d(model.predict(intr.X))
    for j in range(intr.n):
        if not shared_fit:
            X_aug = np.vstack([fit_X, intr.X[j][None, :]])
            y_aug = np.concatenate([fit_y, [intr.y[j]]])
            model = fit_regressor(X_aug, y_aug, spec)
            scores = np.abs(obs.y - model.predict(obs.X))
            mu_j = model.predict(intr.X[j])
        else:
            mu_j = float(mu_int[j])
        w = normalized_weights(r_obs, float(r_int[j]))
        dist = ScoreDistribution(scores, w.obs_weights, w.test_weight)
        q = weighted_quantile(dist, 1.0 - alpha).value
        iv = _interval_from_center(mu_j, q)
        lower[j] = iv.lower
        upper[j] = iv.upper
    return FirstStageIntervals(np.array(intr.X), lower, upper)


def _fit_bound_models(X, lower, upper, spec):
    finite = np.isfinite(lower) & np.isfinite(upper)
    n_dropped = int((~finite).sum())
    if n_dropped:
        logger.debug("dropping %d infinite first-stage intervals from bound fit",
                     n_dropped)
    if not finite.any():
        raise ValueError("every first-stage interval is infinite")
    lo_model = fit_regressor(X[finite], lower[finite], spec)
    hi_model = fit_regressor(X[finite], upper[finite], spec)
    return lo_model, hi_model


def _bounds_to_intervals(lo, hi):
    out = []
    for a, b in zip(np.atleast_1d(lo), np.atleast_1d(hi)):
        a = float(a)
        b = float(b)
        if a > b:
            logger.debug("crossed second-stage bounds (%.4g > %.4g), swapping", a, b)
            a, b = b, a
        out.append(Interval(a, b))
    return out


def wscp_dr_inexact(first: FirstStageIntervals, x_test, spec: RegressorSpec):
    """Second stage, inexact: regress the first-stage endpoints on the
    interventional covariates and read the interval off the two fits.
    Crossed bounds are swapped (and logged)."""
    lo_model, hi_model = _fit_bound_models(first.X, first.lower, first.upper, spec)
    X, single = _test_batch(x_test, first.X.shape[1])
    out = _bounds_to_intervals(lo_model.predict(X), hi_model.predict(X))
    return out[0] if single else out


def wscp_dr_exact(first: FirstStageIntervals, split_index: int, x_test,
                  alpha: float, spec: RegressorSpec):
    """Second stage, exact: fit the bound regressions on the first part of
    the first-stage intervals, then conformalize their miscoverage of the
    held-out part.

    Held-out scores are max(lower-model error, upper-model error) against
    the first-stage endpoints; infinite endpoints yield +inf scores, kept
    conservatively. The offset can be negative, which narrows the interval.
    """
    _check_alpha(alpha)
    m = first.n
    if not 1 <= split_index < m:
        raise ValueError("split_index must leave both parts nonempty")
    lo_model, hi_model = _fit_bound_models(
        first.X[:split_index], first.lower[:split_index], first.upper[:split_index],
        spec,
    )
    cal_X = first.X[split_index:]
    cal_lo = first.lower[split_index:]
    cal_hi = first.upper[split_index:]
    n_cal = m - split_index
    with np.errstate(invalid="ignore"):
        s = np.maximum(
            np.atleast_1d(lo_model.predict(cal_X)) - cal_lo,
            cal_hi - np.atleast_1d(hi_model.predict(cal_X)),
        )
    # -inf - finite or finite - +inf never occurs: bounds are paired
    level = (1.0 - alpha) * (1.0 + 1.0 / n_cal)
    finite = np.sort(s[np.isfinite(s)])
    k = math.ceil(n_cal * level - LEVEL_SLACK)
    if k > len(finite):
        q = math.inf
    else:
        q = float(finite[max(k, 1) - 1])
    X, single = _test_batch(x_test, first.X.shape[1])
    lo = np.atleast_1d(lo_model.predict(X)) - q
    hi = np.atleast_1d(hi_model.predict(X)) + q
    out = _bounds_to_intervals(lo, hi)
    return out[0] if single else out


def wcp_propensity_interval(obs: Dataset, t: int, x_test, alpha: float,
                            spec: RegressorSpec, propensity_spec,
                            split_fraction: float = 0.5):
    """Propensity-weighted split conformal for arm t.

    Reweights calibration residuals of the observational arm by inverse
    estimated treatment probability. Adjusts for covariate shift between
    arms but not for outcome-level confounding.
    """
    _check_alpha(alpha)
    if obs.t is None:
        raise ValueError("observational dataset needs treatment flags")
    if t not in (0, 1):
        raise ValueError("treatment arm must be 0 or 1")
    k = _index_split(obs.n, split_fraction)
    idx = np.arange(obs.n)
    train = obs.take(idx[:k])
    cal = obs.take(idx[k:])
    prop = fit_classifier(train.X, train.t, propensity_spec)

    train_arm = train.where_treatment(t)
    cal_arm = cal.where_treatment(t)
    if train_arm.n == 0 or cal_arm.n == 0:
        raise ValueError(f"arm {t} missing from a split")
    model = fit_regressor(train_arm.X, train_arm.y, spec)
    scores = np.abs(cal_arm.y - model.predict(cal_arm.X))

    p1_cal = np.atleast_1d(prop.predict_proba(cal_arm.X))
    w_cal = 1.0 / (p1_cal if t == 1 else 1.0 - p1_cal)

    X, single = _test_batch(x_test, obs.dim)
    p1_test = np.atleast_1d(prop.predict_proba(X))
    w_test = 1.0 / (p1_test if t == 1 else 1.0 - p1_test)
    mu = np.atleast_1d(model.predict(X))
    out = []
    for i in range(X.shape[0]):
        w = normalized_weights(w_cal, float(w_test[i]))
        dist = ScoreDistribution(scores, w.obs_weights, w.test_weight)
        q = weighted_quantile(dist, 1.0 - alpha).value
        out.append(_interval_from_center(float(mu[i]), q))
    return out[0] if single else out
