"""Density-ratio estimation by probabilistic classification.

A logistic classifier is trained to separate observational samples
(label 1) from interventional samples (label 0); the ratio of
interventional to observational density is then p(0|v)/p(1|v). The
class-prior ratio is deliberately not corrected: every consumer
normalizes the ratios, so a constant factor cancels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .models import ClassifierSpec, LogisticClassifier, fit_classifier


@dataclass(frozen=True)
class RatioModel:
    """Estimated density ratio r(x[, y]) = p_interventional / p_observational."""

    classifier: LogisticClassifier | None
    clamp_low: float
    clamp_high: float
    uses_outcome: bool
    func: Callable | None = None

    def __post_init__(self):
        if (self.classifier is None) == (self.func is None):
            raise ValueError("exactly one of classifier or func must be set")
        if not 0 <= self.clamp_low <= self.clamp_high:
            raise ValueError("invalid clamp bounds")

    @classmethod
    def from_function(cls, func: Callable, uses_outcome: bool,
                      clamp_low: float = 0.0, clamp_high: float = math.inf):
        """Wrap an externally supplied (e.g. analytic) ratio function.

        The function receives (X, y) when uses_outcome else (X,), with X a
        2-d batch, and must return positive ratios per row."""
        return cls(None, clamp_low, clamp_high, uses_outcome, func)

    def ratio(self, x, y=None):
        """Ratio at one point (vector x, scalar y) or a batch (matrix, vector)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = x[None, :] if single else x
        if self.uses_outcome:
            if y is None:
                raise ValueError("this ratio model requires outcomes")
            yv = np.atleast_1d(np.asarray(y, dtype=float))
            if yv.shape[0] != X.shape[0]:
                raise ValueError("outcome batch must match feature rows")
            if not np.isfinite(yv).all():
                raise ValueError("outcomes must be finite")
        else:
            yv = None
        if not np.isfinite(X).all():
            raise ValueError("features must be finite")

        if self.func is not None:
            r = np.asarray(
                self.func(X, yv) if self.uses_outcome else self.func(X), dtype=float
            )
            r = np.atleast_1d(r)
            if (r <= 0).any() or not np.isfinite(r).all():
                raise ValueError("ratio function must return positive finite values")
        else:
            feats = np.hstack([X, yv[:, None]]) if self.uses_outcome else X
            p_obs = self.classifier.predict_proba(feats)
            p_obs = np.atleast_1d(p_obs)
            r = (1.0 - p_obs) / p_obs
        r = np.clip(r, self.clamp_low, self.clamp_high)
        return float(r[0]) if single else r


@dataclass(frozen=True)
class NormalizedWeights:
    """Simplex weights for calibration points plus the test point."""

    obs_weights: np.ndarray
    test_weight: float


def _clamp_bounds(spec: ClassifierSpec):
    c = spec.probability_clamp
    return c / (1.0 - c), (1.0 - c) / c


def fit_density_ratio(obs_X, obs_y, intr_X, intr_y, spec: ClassifierSpec) -> RatioModel:
    """Joint (x, y) ratio model from observational and interventional samples."""
    obs = np.hstack([np.asarray(obs_X, float), np.asarray(obs_y, float)[:, None]])
    intr = np.hstack([np.asarray(intr_X, float), np.asarray(intr_y, float)[:, None]])
    if obs.shape[1] != intr.shape[1]:
        raise ValueError("observational and interventional dimensions differ")
    feats = np.vstack([obs, intr])
    labels = np.concatenate([np.ones(len(obs), np.int64), np.zeros(len(intr), np.int64)])
    clf = fit_classifier(feats, labels, spec)
    lo, hi = _clamp_bounds(spec)
    return RatioModel(clf, lo, hi, uses_outcome=True)


def fit_covariate_ratio(obs_X, intr_X, spec: ClassifierSpec) -> RatioModel:
    """Covariate-only ratio model, for settings where outcomes are unusable."""
    obs = np.asarray(obs_X, float)
    intr = np.asarray(intr_X, float)
    if obs.shape[1] != intr.shape[1]:
        raise ValueError("observational and interventional dimensions differ")
    feats = np.vstack([obs, intr])
    labels = np.concatenate([np.ones(len(obs), np.int64), np.zeros(len(intr), np.int64)])
    clf = fit_classifier(feats, labels, spec)
    lo, hi = _clamp_bounds(spec)
    return RatioModel(clf, lo, hi, uses_outcome=False)


def ratio(model: RatioModel, x, y=None):
    return model.ratio(x, y)


def normalized_weights(obs_ratios, test_ratio: float) -> NormalizedWeights:
    """Normalize ratios over calibration points and one test point.

    p_i = r_i / (sum_j r_j + r_test); the test point keeps the remainder,
    so the weights and the test weight sum to 1.
    """
    r = np.asarray(obs_ratios, dtype=float)
    if r.ndim != 1 or r.size == 0:
        raise ValueError("obs_ratios must be a nonempty 1-d array")
    test_ratio = float(test_ratio)
    if not np.isfinite(r).all() or not math.isfinite(test_ratio):
        raise ValueError("ratios must be finite")
    if (r <= 0).any() or test_ratio <= 0:
        raise ValueError("ratios must be positive")
    denom = float(r.sum()) + test_ratio
    return NormalizedWeights(r / denom, test_ratio / denom)


def effective_sample_size(obs_ratios) -> float:
    """(sum r)^2 / sum r^2, between 1 and n."""
    r = np.asarray(obs_ratios, dtype=float)
    if r.ndim != 1 or r.size == 0:
        raise ValueError("obs_ratios must be a nonempty 1-d array")
    if not np.isfinite(r).all() or (r <= 0).any():
        raise ValueError("ratios must be positive and finite")
    s = float(r.sum())
    return s * s / float((r * r).sum())
