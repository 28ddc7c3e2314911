"""Command-line front end.

Subcommands: `synth` (confounded synthetic benchmark), `run` (user CSV),
`sweep` (one-axis parameter sweep), `gaussian` (analytic-ratio testbed and
the OLS residual-variance check). Field precedence is CLI flag over config
file over built-in default.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys

import numpy as np

from .gaussian import (
    GaussianConfig,
    dissimilarity,
    ols_residual_variance_check,
    width_comparison,
)
from .harness import (
    METHODS,
    ExperimentConfig,
    run_experiment,
    run_sweep,
    summary_dict,
    write_records_csv,
    write_summary_json,
)
from .models import ClassifierSpec, RegressorSpec

_EXPERIMENT_KEYS = (
    "methods", "alpha", "d", "n_tr", "n_cal", "m_tr", "m_cal", "m_ts",
    "a", "b", "c", "noise_scale", "reps", "seed", "grid_points",
    "shared_fit", "split_alpha", "csv_path",
)


def _methods_arg(s: str) -> tuple:
    out = tuple(x.strip() for x in s.split(",") if x.strip())
    if not out:
        raise argparse.ArgumentTypeError("empty method list")
    return out


def _int_list(s: str) -> tuple:
    try:
        return tuple(int(x) for x in s.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {s!r}")


def _add_experiment_flags(p, with_data=False):
    p.add_argument("--config", metavar="FILE",
                   help="JSON file of config fields; explicit flags override it")
    p.add_argument("--alpha", type=float, help="miscoverage level")
    p.add_argument("--methods", type=_methods_arg,
                   help=f"comma-separated subset of {','.join(METHODS)}")
    p.add_argument("--n-obs", type=int,
                   help="total observational rows, split evenly into train/calibration")
    p.add_argument("--m-int", type=int,
                   help="per-arm interventional rows, split evenly into train/calibration")
    p.add_argument("--n-tr", type=int)
    p.add_argument("--n-cal", type=int)
    p.add_argument("--m-tr", type=int)
    p.add_argument("--m-cal", type=int)
    p.add_argument("--m-ts", type=int, help="test points per repetition")
    p.add_argument("--dim", type=int, help="covariate dimension")
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--grid-points", type=int)
    p.add_argument("--shared-fit", action=argparse.BooleanOptionalAction,
                   default=None,
                   help="fit the first-stage base model once instead of per sample")
    p.add_argument("--split-alpha", action=argparse.BooleanOptionalAction,
                   default=None, help="run each arm at alpha/2")
    p.add_argument("--base", choices=("boosted", "ridge"),
                   help="base regressor family")
    p.add_argument("--n-trees", type=int, help="boosting rounds")
    p.add_argument("--ridge-penalty", type=float)
    p.add_argument("--out", metavar="PATH", help="report file to write")
    p.add_argument("--format", choices=("csv", "json"),
                   help="report format (default: inferred from --out suffix)")
    if with_data:
        p.add_argument("--data", required=True, metavar="FILE",
                       help="CSV with x0..x{d-1},t,y,role columns")


def _load_config_file(path):
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError(f"config file {path} must hold a JSON object")
    unknown = set(raw) - set(_EXPERIMENT_KEYS) - {"regressor", "classifier"}
    if unknown:
        raise ValueError(f"unknown config keys {sorted(unknown)}")
    return raw


def _build_experiment_config(args) -> ExperimentConfig:
    vals = {}
    file_vals = _load_config_file(args.config) if args.config else {}
    for key in _EXPERIMENT_KEYS:
        if key in file_vals:
            vals[key] = file_vals[key]
    if "regressor" in file_vals:
        vals["regressor"] = RegressorSpec(**file_vals["regressor"])
    if "classifier" in file_vals:
        vals["classifier"] = ClassifierSpec(**file_vals["classifier"])
    if "methods" in vals:
        vals["methods"] = tuple(vals["methods"])

    direct = {
        "alpha": args.alpha, "methods": args.methods, "reps": args.reps,
        "seed": args.seed, "grid_points": args.grid_points,
        "shared_fit": args.shared_fit, "split_alpha": args.split_alpha,
        "n_tr": args.n_tr, "n_cal": args.n_cal, "m_tr": args.m_tr,
        "m_cal": args.m_cal, "m_ts": args.m_ts, "d": args.dim,
    }
    for key, v in direct.items():
        if v is not None:
            vals[key] = v
    if args.n_obs is not None:
        vals["n_tr"] = args.n_obs // 2
        vals["n_cal"] = args.n_obs - args.n_obs // 2
    if args.m_int is not None:
        vals["m_tr"] = args.m_int // 2
        vals["m_cal"] = args.m_int - args.m_int // 2
    if getattr(args, "data", None) is not None:
        vals["csv_path"] = args.data
    if args.base is not None:
        if args.base == "ridge":
            vals["regressor"] = RegressorSpec(
                kind="ridge",
                ridge_penalty=args.ridge_penalty if args.ridge_penalty is not None else 1e-6,
                feature_map="identity",
            )
        else:
            kw = {}
            if args.n_trees is not None:
                kw["n_trees"] = args.n_trees
            vals["regressor"] = RegressorSpec(kind="boosted_stumps", **kw)
    elif args.n_trees is not None or args.ridge_penalty is not None:
        base = vals.get("regressor", RegressorSpec())
        if args.n_trees is not None and base.kind == "boosted_stumps":
            base = dataclasses.replace(base, n_trees=args.n_trees)
        if args.ridge_penalty is not None and base.kind == "ridge":
            base = dataclasses.replace(base, ridge_penalty=args.ridge_penalty)
        vals["regressor"] = base
    return ExperimentConfig(**vals)


def _fmt(v) -> str:
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return f"{v:.3f}"
    return str(v)


def _print_report(report, file=None):
    if file is None:
        file = sys.stdout  # resolve late so stream redirection works
    print(f"{'method':<22}{'target':<8}{'coverage':<18}{'width':<18}"
          f"{'inf':>5}{'empty':>7}", file=file)
    for row in report.rows:
        cov = f"{_fmt(row.coverage_mean)} +/- {_fmt(row.coverage_std)}"
        wid = f"{_fmt(row.width_mean)} +/- {_fmt(row.width_std)}"
        print(f"{row.method:<22}{row.target:<8}{cov:<18}{wid:<18}"
              f"{row.n_infinite:>5}{row.n_empty:>7}", file=file)


def _emit_report(report, args):
    _print_report(report)
    if args.out:
        fmt = args.format
        if fmt is None:
            fmt = "csv" if args.out.endswith(".csv") else "json"
        if fmt == "csv":
            write_records_csv(report, args.out)
        else:
            write_summary_json(report, args.out)
        print(f"wrote {fmt} report to {args.out}")


def _cmd_synth(args) -> int:
    report = run_experiment(_build_experiment_config(args))
    _emit_report(report, args)
    return 0


def _cmd_run(args) -> int:
    cfg = _build_experiment_config(args)
    if cfg.csv_path is None:
        raise ValueError("run needs --data")
    report = run_experiment(cfg)
    _emit_report(report, args)
    return 0


def _cmd_sweep(args) -> int:
    cfg = _build_experiment_config(args)
    results = run_sweep(cfg, args.param, args.values)
    payload = []
    for value, report in results:
        print(f"--- {args.param} = {value} ---")
        _print_report(report)
        payload.append({"param": args.param, "value": value,
                        **summary_dict(report)})
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        print(f"wrote sweep report to {args.out}")
    return 0


def _cmd_gaussian(args) -> int:
    if args.ols:
        ratio = ols_residual_variance_check(
            n=args.n, d=args.dim, sigma=args.sigma, reps=args.reps,
            seed=args.seed,
        )
        print(f"ols residual variance ratio: {ratio:.4f} "
              f"(n={args.n}, d={args.dim}, sigma={args.sigma}, reps={args.reps})")
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                json.dump({"ols_variance_ratio": ratio, "n": args.n,
                           "d": args.dim, "sigma": args.sigma,
                           "reps": args.reps}, fh, indent=2)
                fh.write("\n")
        return 0
    theta_i = np.full(args.dim, args.theta_i_scale / math.sqrt(args.dim))
    cfg = GaussianConfig(
        d=args.dim,
        theta_O=args.theta_o_factor * theta_i,
        theta_I=theta_i,
        sigma=args.sigma,
        Sigma_O=np.eye(args.dim),
        Sigma_I=np.eye(args.dim),
        n=args.n,
        m=args.m,
        n_test=args.n_test,
        seed=args.seed,
    )
    print(f"dissimilarity: {dissimilarity(cfg):.1f}")
    rep = width_comparison(cfg, alpha=args.alpha, reps=args.reps,
                           use_fitted_ratio=args.fitted_ratio)
    print(f"median widths: weighted transductive "
          f"{np.median(rep.wtcp_median_widths):.3f}, "
          f"interventional-only {np.median(rep.naive_median_widths):.3f}")
    print(f"fraction of reps not wider: {rep.fraction_wtcp_not_wider:.2f}")
    print(f"effective sample size: median {np.median(rep.n_eff):.1f} "
          f"(m = {cfg.m})")
    print(f"coverage: weighted {rep.coverage_wtcp:.3f}, "
          f"naive {rep.coverage_naive:.3f}, empty sets {rep.n_empty}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump({
                "dissimilarity": dissimilarity(cfg),
                "wtcp_median_widths": rep.wtcp_median_widths.tolist(),
                "naive_median_widths": rep.naive_median_widths.tolist(),
                "fraction_wtcp_not_wider": rep.fraction_wtcp_not_wider,
                "n_eff": rep.n_eff.tolist(),
                "coverage_wtcp": rep.coverage_wtcp,
                "coverage_naive": rep.coverage_naive,
                "n_empty": rep.n_empty,
            }, fh, indent=2)
            fh.write("\n")
        print(f"wrote gaussian report to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfconformal",
        description="Finite-sample confidence intervals for counterfactual "
                    "outcomes and treatment effects under hidden confounding.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser(
        "synth", help="confounded synthetic benchmark experiments")
    _add_experiment_flags(p_synth)
    p_synth.set_defaults(func=_cmd_synth)

    p_run = sub.add_parser("run", help="experiments on a user-supplied CSV")
    _add_experiment_flags(p_run, with_data=True)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep one parameter")
    _add_experiment_flags(p_sweep)
    p_sweep.add_argument("--param", choices=("d", "m"), required=True)
    p_sweep.add_argument("--values", type=_int_list, required=True,
                         metavar="V1,V2,...")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_g = sub.add_parser(
        "gaussian",
        help="analytic-ratio testbed width comparison / OLS variance check")
    p_g.add_argument("--dim", type=int, default=10)
    p_g.add_argument("--n", type=int, default=2000,
                     help="observational rows per repetition")
    p_g.add_argument("--m", type=int, default=50,
                     help="interventional rows per repetition")
    p_g.add_argument("--n-test", type=int, default=20)
    p_g.add_argument("--sigma", type=float, default=1.0)
    p_g.add_argument("--theta-i-scale", type=float, default=1.0,
                     help="norm of the interventional coefficient vector")
    p_g.add_argument("--theta-o-factor", type=float, default=1.19,
                     help="observational coefficients as a multiple of the "
                          "interventional ones")
    p_g.add_argument("--alpha", type=float, default=0.1)
    p_g.add_argument("--reps", type=int, default=50)
    p_g.add_argument("--seed", type=int, default=0)
    p_g.add_argument("--fitted-ratio", action="store_true",
                     help="use a fitted classifier ratio instead of the oracle")
    p_g.add_argument("--ols", action="store_true",
                     help="run the OLS residual-variance check instead")
    p_g.add_argument("--out", metavar="PATH")
    p_g.set_defaults(func=_cmd_gaussian)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
