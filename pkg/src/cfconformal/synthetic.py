"""Synthetic causal benchmark with a hidden confounder.

A latent U drives covariates, treatment assignment, and both potential
outcomes, so observational data is confounded. Interventional data redraws
the structural equations with the treatment forced, which keeps the
covariate distribution marginal. Test rows carry both potential outcomes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .models import _sigmoid


@dataclass(frozen=True)
class SyntheticConfig:
    d: int = 1
    n_obs: int = 1000
    m_int: int = 100
    n_test: int = 200
    a: float = 5.0
    b: float = 3.0
    c: float = 0.9
    noise_scale: float = 0.1
    target_treatment: int | None = None  # None generates both arms
    seed: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be a positive integer")
        for name in ("n_obs", "m_int", "n_test"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if not 0.0 <= self.c <= 1.0:
            raise ValueError("c must lie in [0, 1]")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be nonnegative")
        if self.target_treatment not in (None, 0, 1):
            raise ValueError("target_treatment must be 0, 1, or None")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")

    @property
    def arms(self) -> tuple:
        if self.target_treatment is None:
            return (0, 1)
        return (self.target_treatment,)


@dataclass(frozen=True)
class GroundTruthSet:
    """Ground-truth test rows: covariates plus both potential outcomes."""

    X: np.ndarray
    y0: np.ndarray
    y1: np.ndarray

    def __post_init__(self):
        n = self.X.shape[0]
        if not (self.y0.shape == self.y1.shape == (n,)):
            raise ValueError("test outcome arrays must match the row count")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def ite(self) -> np.ndarray:
        return self.y1 - self.y0

    def outcomes(self, arm: int) -> np.ndarray:
        if arm not in (0, 1):
            raise ValueError("treatment arm must be 0 or 1")
        return self.y1 if arm == 1 else self.y0


@dataclass(frozen=True)
class CausalSampleSet:
    observational: Dataset
    interventional: dict
    test: GroundTruthSet
    u_bar_obs: np.ndarray  # latent confounder means, kept for diagnostics


def structural_covariates(U: np.ndarray, Z: np.ndarray, a: float, b: float) -> np.ndarray:
    """X = Z * (a^2 (1 - U) + b^2 U) + U, applied coordinate-wise."""
    return Z * (a * a * (1.0 - U) + b * b * U) + U


def treatment_probability(u_bar: np.ndarray, c: float) -> np.ndarray:
    """c Ubar + (1 - c)(1 - Ubar), clamped into [0, 1] so the Bernoulli draw
    is well defined (the linear form exits the unit interval with positive
    probability)."""
    return np.clip(c * u_bar + (1.0 - c) * (1.0 - u_bar), 0.0, 1.0)


def potential_outcome(u_bar: np.ndarray, arm: int, eps: np.ndarray,
                      noise_scale: float) -> np.ndarray:
    """sigmoid(3 (Ubar +/- 2)) plus scaled noise; arm 1 shifts up."""
    shift = 2.0 if arm == 1 else -2.0
    return _sigmoid(3.0 * (u_bar + shift)) + noise_scale * eps


def _draw_units(rng, n: int, cfg: SyntheticConfig):
    U = rng.standard_normal((n, cfg.d))
    Z = rng.standard_normal((n, cfg.d))
    X = structural_covariates(U, Z, cfg.a, cfg.b)
    return X, U.mean(axis=1)


def generate_synthetic(config: SyntheticConfig, rng=None) -> CausalSampleSet:
    """Draw observational, interventional (per requested arm), and test data.

    Draw order is fixed (observational, arm 0, arm 1, test), so a given
    (config, seed) pair reproduces every array bit for bit.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)

    X, u_bar = _draw_units(rng, config.n_obs, config)
    rho = treatment_probability(u_bar, config.c)
    t = (rng.random(config.n_obs) < rho).astype(np.int64)
    eps1 = rng.standard_normal(config.n_obs)
    eps0 = rng.standard_normal(config.n_obs)
    y1 = potential_outcome(u_bar, 1, eps1, config.noise_scale)
    y0 = potential_outcome(u_bar, 0, eps0, config.noise_scale)
    y = np.where(t == 1, y1, y0)
    observational = Dataset(X=X, y=y, t=t,
                            role=np.full(config.n_obs, "obs", dtype=object))

    interventional = {}
    for arm in (0, 1):
        if arm not in config.arms:
            continue
        Xi, ui = _draw_units(rng, config.m_int, config)
        eps = rng.standard_normal(config.m_int)
        yi = potential_outcome(ui, arm, eps, config.noise_scale)
        interventional[arm] = Dataset(
            X=Xi, y=yi, t=np.full(config.m_int, arm, dtype=np.int64),
            role=np.full(config.m_int, "int", dtype=object),
        )

    Xt, ut = _draw_units(rng, config.n_test, config)
    te1 = rng.standard_normal(config.n_test)
    te0 = rng.standard_normal(config.n_test)
    test = GroundTruthSet(
        X=Xt,
        y0=potential_outcome(ut, 0, te0, config.noise_scale),
        y1=potential_outcome(ut, 1, te1, config.noise_scale),
    )
    return CausalSampleSet(observational=observational,
                           interventional=interventional,
                           test=test,
                           u_bar_obs=u_bar)
