"""Finite-sample confidence intervals for counterfactual outcomes and
individual treatment effects under hidden confounding, built on weighted
conformal prediction with learned density ratios."""

from .data import ROLES, Dataset, load_csv_dataset, save_csv_dataset
from .density import (
    NormalizedWeights,
    RatioModel,
    effective_sample_size,
    fit_covariate_ratio,
    fit_density_ratio,
    normalized_weights,
)
from .gaussian import (
    DeltaREstimate,
    GaussianConfig,
    WidthComparisonReport,
    dissimilarity,
    estimate_delta_r,
    generate_gaussian,
    ols_residual_variance_check,
    oracle_ratio,
    oracle_ratio_model,
    width_comparison,
)
from .harness import (
    METHODS,
    ExperimentConfig,
    ExperimentReport,
    MethodSummary,
    RepRecord,
    run_experiment,
    run_sweep,
    sample_set_to_dataset,
    summary_dict,
    write_records_csv,
    write_sample_set_csv,
    write_summary_json,
)
from .intervals import (
    FirstStageIntervals,
    Interval,
    TransductiveResult,
    YGrid,
    naive_interval,
    scp_interval,
    tcp_interval,
    wcp_propensity_interval,
    wscp_dr_exact,
    wscp_dr_first_stage,
    wscp_dr_inexact,
    wtcp_dr_interval,
)
from .ite import ITEInterval, bonferroni_ite
from .metrics import WidthSummary, coverage, mean_width
from .models import (
    ClassifierSpec,
    RegressorSpec,
    design_matrix,
    expand_features,
    fit_classifier,
    fit_regressor,
    predict,
    predict_proba,
)
from .quantiles import (
    LEVEL_SLACK,
    WEIGHT_TOL,
    QuantileResult,
    ScoreDistribution,
    absolute_residual_score,
    empirical_quantile,
    weighted_quantile,
)
from .synthetic import (
    CausalSampleSet,
    GroundTruthSet,
    SyntheticConfig,
    generate_synthetic,
    potential_outcome,
    structural_covariates,
    treatment_probability,
)

__version__ = "0.1.0"

__all__ = [
    "CausalSampleSet",
    "ClassifierSpec",
    "Dataset",
    "DeltaREstimate",
    "ExperimentConfig",
    "ExperimentReport",
    "FirstStageIntervals",
    "GaussianConfig",
    "GroundTruthSet",
    "ITEInterval",
    "Interval",
    "LEVEL_SLACK",
    "METHODS",
    "MethodSummary",
    "NormalizedWeights",
    "QuantileResult",
    "RatioModel",
    "RegressorSpec",
    "RepRecord",
    "ROLES",
    "ScoreDistribution",
    "SyntheticConfig",
    "TransductiveResult",
    "WEIGHT_TOL",
    "WidthComparisonReport",
    "WidthSummary",
    "YGrid",
    "__version__",
    "absolute_residual_score",
    "bonferroni_ite",
    "coverage",
    "design_matrix",
    "dissimilarity",
    "effective_sample_size",
    "empirical_quantile",
    "estimate_delta_r",
    "expand_features",
    "fit_classifier",
    "fit_covariate_ratio",
    "fit_density_ratio",
    "fit_regressor",
    "generate_gaussian",
    "generate_synthetic",
    "load_csv_dataset",
    "mean_width",
    "naive_interval",
    "normalized_weights",
    "ols_residual_variance_check",
    "oracle_ratio",
    "oracle_ratio_model",
    "potential_outcome",
    "predict",
    "predict_proba",
    "run_experiment",
    "run_sweep",
    "sample_set_to_dataset",
    "save_csv_dataset",
    "scp_interval",
    "structural_covariates",
    "summary_dict",
    "tcp_interval",
    "treatment_probability",
    "wcp_propensity_interval",
    "weighted_quantile",
    "width_comparison",
    "write_records_csv",
    "write_sample_set_csv",
    "write_summary_json",
    "wscp_dr_exact",
    "wscp_dr_first_stage",
    "wscp_dr_inexact",
    "wtcp_dr_interval",
]
