"""Experiment orchestration: per-repetition data splits, interval
construction for every requested method and arm, treatment-effect
combination, aggregation, and report emission.

Per repetition and arm t the protocol is: base model on the observational
training split, conformity scores on the observational calibration split,
density-ratio classifier on observational-train plus interventional-train,
first-stage intervals over the interventional calibration split, and
method-specific second stages, all evaluated at the shared test points.
The naive baseline sees only interventional data; the propensity method
sees only observational data.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, load_csv_dataset, save_csv_dataset
from .density import fit_covariate_ratio, fit_density_ratio
from .intervals import (
    YGrid,
    scp_interval,
    wcp_propensity_interval,
    wscp_dr_exact,
    wscp_dr_first_stage,
    wscp_dr_inexact,
    wtcp_dr_interval,
)
from .ite import bonferroni_ite
from .models import ClassifierSpec, RegressorSpec
from .synthetic import SyntheticConfig, generate_synthetic

METHODS = (
    "naive",
    "wcp",
    "wtcp_dr",
    "wscp_dr_inexact",
    "wscp_dr_exact",
    "wscp_dr_star_inexact",
    "wscp_dr_star_exact",
)

RECORD_COLUMNS = ("method", "target", "rep", "coverage", "width_mean",
                  "width_finite_mean", "n_infinite", "n_empty")


@dataclass(frozen=True)
class ExperimentConfig:
    methods: tuple = ("naive", "wcp", "wscp_dr_inexact", "wscp_dr_exact")
    alpha: float = 0.1
    d: int = 1
    n_tr: int = 5000
    n_cal: int = 5000
    m_tr: int = 125
    m_cal: int = 125
    m_ts: int = 200
    a: float = 5.0
    b: float = 3.0
    c: float = 0.9
    noise_scale: float = 0.1
    reps: int = 10
    seed: int = 0
    grid_points: int = 200
    shared_fit: bool = True
    split_alpha: bool = False  # run each arm at alpha/2 for a 1-alpha ITE level
    csv_path: str | None = None
    regressor: RegressorSpec = field(default_factory=RegressorSpec)
    classifier: ClassifierSpec = field(default_factory=ClassifierSpec)

    def __post_init__(self):
        methods = tuple(self.methods)
        object.__setattr__(self, "methods", methods)
        if not methods:
            raise ValueError("methods must be nonempty")
        unknown = [m for m in methods if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; choose from {METHODS}")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        for name in ("n_tr", "n_cal", "m_tr", "m_cal", "m_ts", "reps",
                     "grid_points"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.grid_points < 2:
            raise ValueError("grid_points must be at least 2")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        needs_split = {"wscp_dr_exact", "wscp_dr_star_exact"}
        if needs_split & set(methods) and self.m_cal < 2:
            raise ValueError("exact second stage needs m_cal >= 2")
        if self.csv_path is None:
            # surfaces bad d/c/noise_scale now instead of mid-run
            self._synthetic_config()

    def _synthetic_config(self) -> SyntheticConfig:
        return SyntheticConfig(
            d=self.d,
            n_obs=self.n_tr + self.n_cal,
            m_int=self.m_tr + self.m_cal,
            n_test=self.m_ts,
            a=self.a, b=self.b, c=self.c,
            noise_scale=self.noise_scale,
            seed=self.seed,
        )

    @property
    def arm_alpha(self) -> float:
        return self.alpha / 2 if self.split_alpha else self.alpha


@dataclass(frozen=True)
class RepRecord:
    """One (method, target, repetition) evaluation."""

    method: str
    target: str  # y0 | y1 | ite
    rep: int
    coverage: float
    width_mean: float
    width_finite_mean: float
    n_infinite: int
    n_empty: int


@dataclass(frozen=True)
class MethodSummary:
    method: str
    target: str
    coverage_mean: float
    coverage_std: float
    width_mean: float
    width_std: float
    width_finite_mean: float
    n_reps: int
    n_infinite: int
    n_empty: int


@dataclass(frozen=True)
class ExperimentReport:
    rows: tuple
    records: tuple
    config: ExperimentConfig

    def row(self, method: str, target: str) -> MethodSummary:
        for r in self.rows:
            if r.method == method and r.target == target:
                return r
        raise KeyError(f"no summary for ({method}, {target})")


def _std(values: np.ndarray) -> float:
    if len(values) < 2:
        return 0.0
    if not np.all(np.isfinite(values)):
        return math.inf
    return float(values.std(ddof=1))


def _summarize(records) -> tuple:
    keys = sorted({(r.method, r.target) for r in records})
    rows = []
    for method, target in keys:
        group = [r for r in records if r.method == method and r.target == target]
        cov = np.array([r.coverage for r in group])
        width = np.array([r.width_mean for r in group])
        finite = np.array([r.width_finite_mean for r in group])
        finite = finite[~np.isnan(finite)]
        rows.append(MethodSummary(
            method=method,
            target=target,
            coverage_mean=float(cov.mean()),
            coverage_std=_std(cov),
            width_mean=float(width.mean()),
            width_std=_std(width),
            width_finite_mean=float(finite.mean()) if finite.size else math.nan,
            n_reps=len(group),
            n_infinite=sum(r.n_infinite for r in group),
            n_empty=sum(r.n_empty for r in group),
        ))
    return tuple(rows)


def _evaluate(intervals, truths) -> tuple:
    """Coverage and width stats over a list of Interval-or-None."""
    hits = 0
    widths = []
    n_empty = 0
    for iv, truth in zip(intervals, truths):
        if iv is None:
            n_empty += 1
            continue
        if iv.contains(float(truth)):
            hits += 1
    cov = hits / len(intervals)
    widths = np.array([iv.width for iv in intervals if iv is not None])
    if widths.size == 0:
        return cov, math.nan, math.nan, 0, n_empty
    n_inf = int(np.isinf(widths).sum())
    mean = math.inf if n_inf else float(widths.mean())
    fin = widths[np.isfinite(widths)]
    finite_mean = float(fin.mean()) if fin.size else math.nan
    return cov, mean, finite_mean, n_inf, n_empty


def _ridge_for_transductive(reg: RegressorSpec) -> RegressorSpec:
    # the per-candidate refits need the closed-form path to be tractable
    if reg.kind == "ridge":
        return reg
    return RegressorSpec(kind="ridge", ridge_penalty=1e-6,
                         feature_map=reg.feature_map)


@dataclass(frozen=True)
class _ArmData:
    obs_full: Dataset  # both arms, train + calibration rows in split order
    obs_tr: Dataset    # observational training rows with T = arm
    obs_cal: Dataset   # observational calibration rows with T = arm
    int_tr: Dataset
    int_cal: Dataset
    test_X: np.ndarray

    @property
    def obs_arm(self) -> Dataset:
        """All observational rows of this arm (train + calibration)."""
        a, b = self.obs_tr, self.obs_cal
        t = np.concatenate([a.t, b.t]) if a.t is not None else None
        return Dataset(X=np.vstack([a.X, b.X]),
                       y=np.concatenate([a.y, b.y]), t=t)


def _arm_intervals(cfg: ExperimentConfig, method: str, arm: int,
                   data: _ArmData, alpha: float):
    """Returns (list of Interval-or-None, n_empty)."""
    reg = cfg.regressor
    if method == "naive":
        ivs = scp_interval(data.int_tr, data.int_cal, data.test_X, alpha, reg)
        return list(ivs), 0
    if method == "wcp":
        frac = cfg.n_tr / (cfg.n_tr + cfg.n_cal)
        # plain logistic regression on raw covariates for the propensity;
        # the nonlinear feature map stays with the density-ratio methods
        prop_spec = dataclasses.replace(cfg.classifier, feature_map="identity")
        ivs = wcp_propensity_interval(
            data.obs_full, arm, data.test_X, alpha, reg, prop_spec,
            split_fraction=frac,
        )
        return list(ivs), 0
    if method == "wtcp_dr":
        ratio = fit_density_ratio(
            data.obs_tr.X, data.obs_tr.y, data.int_tr.X, data.int_tr.y,
            cfg.classifier,
        )
        obs_arm = data.obs_arm
        pooled_y = np.concatenate([obs_arm.y, data.int_tr.y])
        grid = YGrid.from_outcomes(pooled_y, n_points=cfg.grid_points)
        spec = _ridge_for_transductive(reg)
        out = []
        n_empty = 0
        for x in data.test_X:
            res = wtcp_dr_interval(obs_arm, ratio, x, alpha, grid, spec)
            if res.is_empty:
                res = wtcp_dr_interval(obs_arm, ratio, x, alpha,
                                       grid.widened(), spec)
            if res.is_empty:
                out.append(None)
                n_empty += 1
            else:
                out.append(res.hull)
        return out, n_empty
    if method.startswith("wscp_dr"):
        if "star" in method:
            ratio = fit_covariate_ratio(data.obs_tr.X, data.int_tr.X,
                                        cfg.classifier)
        else:
            ratio = fit_density_ratio(
                data.obs_tr.X, data.obs_tr.y, data.int_tr.X, data.int_tr.y,
                cfg.classifier,
            )
        first = wscp_dr_first_stage(
            data.obs_cal, data.int_cal, ratio, alpha, reg,
            shared_fit=cfg.shared_fit, train=data.obs_tr,
        )
        if method.endswith("inexact"):
            ivs = wscp_dr_inexact(first, data.test_X, reg)
        else:
            ivs = wscp_dr_exact(first, first.n // 2, data.test_X, alpha, reg)
        return list(ivs), 0
    raise ValueError(f"unknown method {method}")


def _split_obs(obs: Dataset, n_tr: int, n_cal: int):
    idx = np.arange(obs.n)
    return obs.take(idx[:n_tr]), obs.take(idx[n_tr:n_tr + n_cal])


def _synthetic_rep(cfg: ExperimentConfig, rng):
    s = generate_synthetic(cfg._synthetic_config(), rng)
    obs_tr, obs_cal = _split_obs(s.observational, cfg.n_tr, cfg.n_cal)
    arms = {}
    for arm in (0, 1):
        intr = s.interventional[arm]
        idx = np.arange(intr.n)
        arms[arm] = _ArmData(
            obs_full=s.observational,
            obs_tr=obs_tr.where_treatment(arm),
            obs_cal=obs_cal.where_treatment(arm),
            int_tr=intr.take(idx[:cfg.m_tr]),
            int_cal=intr.take(idx[cfg.m_tr:cfg.m_tr + cfg.m_cal]),
            test_X=s.test.X,
        )
    truths = {0: s.test.y0, 1: s.test.y1, "ite": s.test.ite}
    return arms, truths


class _CsvSource:
    """Role-tagged CSV rows, reshuffled (not regenerated) per repetition."""

    def __init__(self, cfg: ExperimentConfig):
        full = load_csv_dataset(cfg.csv_path)
        if full.role is None:
            raise ValueError("CSV source needs a role column")
        if full.t is None:
            raise ValueError("CSV source needs a t column")
        self.obs = full.where_role("obs")
        self.test = full.where_role("test")
        self.intr = {}
        intr = full.where_role("int")
        self.arms = tuple(sorted(int(v) for v in np.unique(intr.t)))
        if not self.arms:
            raise ValueError("CSV source has no interventional rows")
        for arm in self.arms:
            self.intr[arm] = intr.where_treatment(arm)
            if self.intr[arm].n < cfg.m_tr + cfg.m_cal:
                raise ValueError(
                    f"arm {arm} has {self.intr[arm].n} interventional rows, "
                    f"need m_tr + m_cal = {cfg.m_tr + cfg.m_cal}"
                )
        if self.obs.n < cfg.n_tr + cfg.n_cal:
            raise ValueError(
                f"{self.obs.n} observational rows, need n_tr + n_cal = "
                f"{cfg.n_tr + cfg.n_cal}"
            )
        if self.test.n == 0:
            raise ValueError("CSV source has no test rows")
        self.cfg = cfg

    def rep(self, rng):
        cfg = self.cfg
        obs = self.obs.take(rng.permutation(self.obs.n))
        obs = obs.take(np.arange(cfg.n_tr + cfg.n_cal))
        obs_tr, obs_cal = _split_obs(obs, cfg.n_tr, cfg.n_cal)
        arms = {}
        truths = {}
        for arm in self.arms:
            intr = self.intr[arm].take(rng.permutation(self.intr[arm].n))
            idx = np.arange(intr.n)
            test_arm = self.test.where_treatment(arm)
            if test_arm.n == 0:
                continue
            arms[arm] = _ArmData(
                obs_full=obs,
                obs_tr=obs_tr.where_treatment(arm),
                obs_cal=obs_cal.where_treatment(arm),
                int_tr=intr.take(idx[:cfg.m_tr]),
                int_cal=intr.take(idx[cfg.m_tr:cfg.m_tr + cfg.m_cal]),
                test_X=test_arm.X,
            )
            truths[arm] = test_arm.y
        # no joint potential outcomes per test row, so no ITE target
        return arms, truths


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run every requested method over cfg.reps repetitions.

    Synthetic sources regenerate data per repetition from a derived seed;
    CSV sources reshuffle the observational and interventional rows. The
    report is deterministic given (cfg, seed).
    """
    source = _CsvSource(cfg) if cfg.csv_path is not None else None
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.reps)
    records = []
    alpha = cfg.arm_alpha
    for rep in range(cfg.reps):
        rng = np.random.default_rng(seeds[rep])
        if source is None:
            arms, truths = _synthetic_rep(cfg, rng)
        else:
            arms, truths = source.rep(rng)
        for method in cfg.methods:
            per_arm = {}
            for arm, data in arms.items():
                ivs, _ = _arm_intervals(cfg, method, arm, data, alpha)
                per_arm[arm] = ivs
                cov, mean, fmean, n_inf, n_none = _evaluate(ivs, truths[arm])
                records.append(RepRecord(
                    method=method, target=f"y{arm}", rep=rep,
                    coverage=cov, width_mean=mean, width_finite_mean=fmean,
                    n_infinite=n_inf, n_empty=n_none,
                ))
            if "ite" in truths and 0 in per_arm and 1 in per_arm:
                ites = []
                for c1, c0 in zip(per_arm[1], per_arm[0]):
                    if c1 is None or c0 is None:
                        ites.append(None)
                    else:
                        ites.append(bonferroni_ite(c1, c0, alpha, alpha))
                cov, mean, fmean, n_inf, n_none = _evaluate(ites, truths["ite"])
                records.append(RepRecord(
                    method=method, target="ite", rep=rep,
                    coverage=cov, width_mean=mean, width_finite_mean=fmean,
                    n_infinite=n_inf, n_empty=n_none,
                ))
    records = tuple(records)
    return ExperimentReport(rows=_summarize(records), records=records,
                            config=cfg)


def run_sweep(cfg: ExperimentConfig, param: str, values) -> list:
    """Re-run the experiment along one axis; `d` varies the covariate
    dimension, `m` the per-arm interventional sample count (split evenly
    between training and calibration)."""
    if param not in ("d", "m"):
        raise ValueError("sweep param must be 'd' or 'm'")
    out = []
    for v in values:
        v = int(v)
        if param == "d":
            sub = dataclasses.replace(cfg, d=v)
        else:
            if v < 2:
                raise ValueError("swept m must be at least 2")
            sub = dataclasses.replace(cfg, m_tr=v // 2, m_cal=v - v // 2)
        out.append((v, run_experiment(sub)))
    return out


def sample_set_to_dataset(s) -> Dataset:
    """Flatten a generated sample set into one role-tagged dataset.

    Test rows appear once per arm (t says which potential outcome y holds),
    which is the layout the CSV experiment source expects.
    """
    arms = sorted(s.interventional)
    X = [s.observational.X]
    y = [s.observational.y]
    t = [s.observational.t]
    role = [np.full(s.observational.n, "obs", dtype=object)]
    for arm in arms:
        d = s.interventional[arm]
        X.append(d.X)
        y.append(d.y)
        t.append(np.full(d.n, arm, dtype=np.int64))
        role.append(np.full(d.n, "int", dtype=object))
    for arm in (0, 1):
        X.append(s.test.X)
        y.append(s.test.outcomes(arm))
        t.append(np.full(s.test.n, arm, dtype=np.int64))
        role.append(np.full(s.test.n, "test", dtype=object))
    return Dataset(
        X=np.vstack(X), y=np.concatenate(y), t=np.concatenate(t),
        role=np.concatenate(role),
    )


def write_sample_set_csv(s, path: str) -> None:
    save_csv_dataset(sample_set_to_dataset(s), path)


def write_records_csv(report: ExperimentReport, path: str) -> None:
    """One row per (method, target, repetition); floats round-trip."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(RECORD_COLUMNS)
        for r in report.records:
            w.writerow([
                r.method, r.target, r.rep,
                repr(r.coverage), repr(r.width_mean),
                repr(r.width_finite_mean), r.n_infinite, r.n_empty,
            ])


def _config_dict(cfg: ExperimentConfig) -> dict:
    out = dataclasses.asdict(cfg)
    out["methods"] = list(cfg.methods)
    return out


def summary_dict(report: ExperimentReport) -> dict:
    def clean(v):
        if isinstance(v, float) and math.isnan(v):
            return None
        if isinstance(v, float) and math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v

    return {
        "config": _config_dict(report.config),
        "rows": [
            {k: clean(v) for k, v in dataclasses.asdict(row).items()}
            for row in report.rows
        ],
    }


def write_summary_json(report: ExperimentReport, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary_dict(report), fh, indent=2)
        fh.write("\n")
