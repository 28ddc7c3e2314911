"""Base learners, built from scratch: closed-form ridge, stagewise boosted
regression trees on the compiled kernels, and a logistic classifier trained
by full-batch gradient descent.

All learners append an intercept as a trailing constant feature and accept
either a single feature vector or a batch matrix at prediction time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _accel

REGRESSOR_KINDS = ("ridge", "boosted_stumps")
FEATURE_MAPS = ("identity", "polynomial_degree2")


@dataclass(frozen=True)
class RegressorSpec:
    kind: str = "boosted_stumps"
    ridge_penalty: float = 1e-6
    n_trees: int = 100
    learning_rate: float = 0.1
    max_depth: int = 3
    feature_map: str = "identity"

    def __post_init__(self):
        if self.kind not in REGRESSOR_KINDS:
            raise ValueError(f"unknown regressor kind {self.kind!r}")
        if self.feature_map not in FEATURE_MAPS:
            raise ValueError(f"unknown feature map {self.feature_map!r}")
        if not (math.isfinite(self.ridge_penalty) and self.ridge_penalty >= 0):
            raise ValueError("ridge_penalty must be finite and nonnegative")
        if self.n_trees < 1:
            raise ValueError("n_trees must be positive")
        if not 0 < self.learning_rate <= 1:
            raise ValueError("learning_rate must lie in (0, 1]")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str = "logistic"
    feature_map: str = "polynomial_degree2"
    max_iterations: int = 500
    step_size: float = 1.0
    l2_penalty: float = 1e-4
    probability_clamp: float = 0.01

    def __post_init__(self):
        if self.kind != "logistic":
            raise ValueError(f"unknown classifier kind {self.kind!r}")
        if self.feature_map not in FEATURE_MAPS:
            raise ValueError(f"unknown feature map {self.feature_map!r}")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be nonnegative")
        if not (math.isfinite(self.step_size) and self.step_size > 0):
            raise ValueError("step_size must be positive")
        if not (math.isfinite(self.l2_penalty) and self.l2_penalty >= 0):
            raise ValueError("l2_penalty must be nonnegative")
        if not 0 < self.probability_clamp < 0.5:
            raise ValueError("probability_clamp must lie in (0, 0.5)")


def expand_features(X: np.ndarray, feature_map: str) -> np.ndarray:
    """Apply a feature map. polynomial_degree2 adds all x_i * x_j, i <= j."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("expand_features expects a 2-d array")
    if feature_map == "identity":
        return X
    if feature_map != "polynomial_degree2":
        raise ValueError(f"unknown feature map {feature_map!r}")
    d = X.shape[1]
    cols = [X]
    for i in range(d):
        for j in range(i, d):
            cols.append((X[:, i] * X[:, j])[:, None])
    return np.hstack(cols)


def design_matrix(X: np.ndarray, feature_map: str) -> np.ndarray:
    """Feature map plus trailing intercept column."""
    Phi = expand_features(X, feature_map)
    return np.hstack([Phi, np.ones((Phi.shape[0], 1))])


def _as_batch(x, input_dim):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        if x.shape[0] != input_dim:
            raise ValueError(f"expected vector of length {input_dim}, got {x.shape[0]}")
        return x[None, :], True
    if x.ndim == 2:
        if x.shape[1] != input_dim:
            raise ValueError(f"expected {input_dim} columns, got {x.shape[1]}")
        return x, False
    raise ValueError("inputs must be a vector or a matrix")


@dataclass(frozen=True)
class RidgeRegressor:
    spec: RegressorSpec
    coef: np.ndarray
    input_dim: int

    def predict(self, x):
        X, single = _as_batch(x, self.input_dim)
        out = design_matrix(X, self.spec.feature_map) @ self.coef
        return float(out[0]) if single else out


@dataclass(frozen=True)
class BoostedTreesRegressor:
    spec: RegressorSpec
    base: float
    features: np.ndarray
    thresholds: np.ndarray
    lefts: np.ndarray
    rights: np.ndarray
    values: np.ndarray
    training_mse_path: np.ndarray
    input_dim: int

    def predict(self, x):
        X, single = _as_batch(x, self.input_dim)
        Phi = np.ascontiguousarray(expand_features(X, self.spec.feature_map))
        raw = _accel.predict_forest(
            self.features, self.thresholds, self.lefts, self.rights, self.values, Phi
        )
        out = self.base + self.spec.learning_rate * raw
        return float(out[0]) if single else out


def _validate_training_inputs(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise ValueError("training features must be a 2-d array")
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise ValueError("targets must be 1-d and match the feature rows")
    if X.shape[0] == 0:
        raise ValueError("training set is empty")
    if not np.isfinite(X).all() or not np.isfinite(y).all():
        raise ValueError("training data must be finite")
    return X, y


def _fit_ridge(X, y, spec):
    Phi = design_matrix(X, spec.feature_map)
    p = Phi.shape[1]
    if spec.ridge_penalty == 0 and np.linalg.matrix_rank(Phi) < p:
        raise ValueError("singular normal equations with zero ridge penalty")
    gram = Phi.T @ Phi + spec.ridge_penalty * np.eye(p)
    coef = np.linalg.solve(gram, Phi.T @ y)
    return RidgeRegressor(spec, coef, X.shape[1])


def _fit_boosted(X, y, spec):
    Phi = np.ascontiguousarray(expand_features(X, spec.feature_map))
    n = Phi.shape[0]
    base = float(y.mean())
    resid = y - base
    max_nodes = 2 ** (spec.max_depth + 1) - 1
    T = spec.n_trees
    features = np.empty((T, max_nodes), dtype=np.int64)
    thresholds = np.empty((T, max_nodes))
    lefts = np.empty((T, max_nodes), dtype=np.int64)
    rights = np.empty((T, max_nodes), dtype=np.int64)
    values = np.empty((T, max_nodes))
    mse_path = np.empty(T)
    for t in range(T):
        tree = _accel.build_tree(Phi, resid, spec.max_depth, 1)
        features[t], thresholds[t], lefts[t], rights[t], values[t] = tree
        resid = resid - spec.learning_rate * _accel.predict_tree(*tree, Phi)
        mse_path[t] = float((resid**2).mean())
    return BoostedTreesRegressor(
        spec, base, features, thresholds, lefts, rights, values, mse_path, X.shape[1]
    )


def fit_regressor(X, y, spec: RegressorSpec):
    X, y = _validate_training_inputs(X, y)
    if spec.kind == "ridge":
        return _fit_ridge(X, y, spec)
    return _fit_boosted(X, y, spec)


def predict(model, x):
    return model.predict(x)


def _sigmoid(a):
    out = np.empty_like(a)
    pos = a >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
    e = np.exp(a[~pos])
    out[~pos] = e / (1.0 + e)
    return out


@dataclass(frozen=True)
class LogisticClassifier:
    spec: ClassifierSpec
    weights: np.ndarray
    shift: np.ndarray
    scale: np.ndarray
    loss_path: np.ndarray
    input_dim: int

    def _logits(self, X):
        Phi = expand_features(X, self.spec.feature_map)
        Phi = (Phi - self.shift) / self.scale
        return Phi @ self.weights[:-1] + self.weights[-1]

    def predict_proba(self, x):
        """Clamped P(z = 1 | features)."""
        X, single = _as_batch(x, self.input_dim)
        c = self.spec.probability_clamp
        p = np.clip(_sigmoid(self._logits(X)), c, 1.0 - c)
        return float(p[0]) if single else p


def _log_loss(logits, z, w, l2):
    # numerically stable -mean[z log p + (1-z) log(1-p)] + ridge term
    ce = np.logaddexp(0.0, logits) - z * logits
    return float(ce.mean() + 0.5 * l2 * (w[:-1] @ w[:-1]))


def fit_classifier(X, z, spec: ClassifierSpec) -> LogisticClassifier:
    """Gradient descent from zero weights with backtracking halving, so the
    regularized log-loss never increases along the iterate path."""
    X = np.asarray(X, dtype=float)
    z = np.asarray(z)
    if X.ndim != 2 or z.ndim != 1 or z.shape[0] != X.shape[0]:
        raise ValueError("classifier inputs must be (n, d) features and n labels")
    if X.shape[0] == 0:
        raise ValueError("training set is empty")
    if not np.isfinite(X).all():
        raise ValueError("training features must be finite")
    labels = np.unique(z)
    if not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    if labels.size < 2:
        raise ValueError("training labels contain a single class")
    z = z.astype(float)

    Phi = expand_features(X, spec.feature_map)
    shift = Phi.mean(axis=0)
    scale = Phi.std(axis=0)
    scale[scale == 0] = 1.0
    Phi = (Phi - shift) / scale
    Phi = np.hstack([Phi, np.ones((Phi.shape[0], 1))])

    n, p = Phi.shape
    w = np.zeros(p)
    step = spec.step_size
    losses = [_log_loss(Phi @ w, z, w, spec.l2_penalty)]
    for _ in range(spec.max_iterations):
        logits = Phi @ w
        grad = Phi.T @ (_sigmoid(logits) - z) / n
        grad[:-1] += spec.l2_penalty * w[:-1]
        gnorm = float(np.sqrt(grad @ grad))
        if gnorm < 1e-10:
            break
        cur = losses[-1]
        accepted = False
        for _ in range(40):
            cand = w - step * grad
            loss = _log_loss(Phi @ cand, z, cand, spec.l2_penalty)
            if loss <= cur:
                w = cand
                losses.append(loss)
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        step = min(step * 2.0, spec.step_size)
    return LogisticClassifier(
        spec, w, shift, scale, np.asarray(losses), X.shape[1]
    )


def predict_proba(model, x):
    return model.predict_proba(x)
