"""Nonparametric regression toolkit built around three estimator families:

shallow ReLU networks trained with weight-decay or path-norm regularization,
an exact locally adaptive spline (second-order total-variation penalty) in
one dimension, and classical linear smoothers (cubic smoothing spline,
thin-plate spline).  An experiment harness measures estimation-error decay
rates and a CLI drives dataset generation, fitting, studies, and figures.
"""

from .targets import (
    Dataset,
    GaussianMix2D,
    PiecewiseLinear1D,
    PureRidge,
    TargetFunction,
    TriangleRidge2D,
    eval_target,
    gaussian_mix_2d,
    inhomogeneous_1d,
    make_dataset,
    read_dataset_csv,
    triangle_ridge_2d,
    triangle_wave,
    uniform_ball,
    write_dataset_csv,
)
from .network import (
    PATH_NORM,
    WEIGHT_DECAY,
    NetworkParams,
    TrainConfig,
    TrainingDivergedError,
    TrainReport,
    balance,
    empty_network,
    forward,
    gradient,
    network_config,
    network_from_config,
    objective,
    path_norm,
    reduce,
    train,
    weight_decay_penalty,
)
from .trendfilter import (
    SplineModel,
    TrendDiagnostics,
    eval_spline,
    fit_trend,
    fit_trend_path,
    lambda_max,
    spline_config,
    spline_from_config,
    trend_objective,
    tv2,
)
from .smoothers import (
    CssModel,
    TpsModel,
    eval_css,
    eval_tps,
    fit_css,
    fit_tps,
)
from .experiments import (
    CssEstimator,
    DesignEval,
    ExperimentSpec,
    FixedRule,
    GridEval,
    HoldOutRule,
    LinearityReport,
    OracleRule,
    RateResult,
    ReluNetEstimator,
    TpsEstimator,
    TrendFilterEstimator,
    TrialRecord,
    approximation_study,
    default_lambda_grid,
    embed_as_network,
    empirical_mse,
    eval_points,
    fit_estimator,
    linearity_probe,
    loglog_slope,
    rate_study,
    select_lambda,
    sup_error,
    trend_witness,
)

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "GaussianMix2D",
    "PiecewiseLinear1D",
    "PureRidge",
    "TargetFunction",
    "TriangleRidge2D",
    "eval_target",
    "gaussian_mix_2d",
    "inhomogeneous_1d",
    "make_dataset",
    "read_dataset_csv",
    "triangle_ridge_2d",
    "triangle_wave",
    "uniform_ball",
    "write_dataset_csv",
    "PATH_NORM",
    "WEIGHT_DECAY",
    "NetworkParams",
    "TrainConfig",
    "TrainingDivergedError",
    "TrainReport",
    "balance",
    "empty_network",
    "forward",
    "gradient",
    "network_config",
    "network_from_config",
    "objective",
    "path_norm",
    "reduce",
    "train",
    "weight_decay_penalty",
    "SplineModel",
    "TrendDiagnostics",
    "eval_spline",
    "fit_trend",
    "fit_trend_path",
    "lambda_max",
    "spline_config",
    "spline_from_config",
    "trend_objective",
    "tv2",
    "CssModel",
    "TpsModel",
    "eval_css",
    "eval_tps",
    "fit_css",
    "fit_tps",
    "CssEstimator",
    "DesignEval",
    "ExperimentSpec",
    "FixedRule",
    "GridEval",
    "HoldOutRule",
    "LinearityReport",
    "OracleRule",
    "RateResult",
    "ReluNetEstimator",
    "TpsEstimator",
    "TrendFilterEstimator",
    "TrialRecord",
    "approximation_study",
    "default_lambda_grid",
    "embed_as_network",
    "empirical_mse",
    "eval_points",
    "fit_estimator",
    "linearity_probe",
    "loglog_slope",
    "rate_study",
    "select_lambda",
    "sup_error",
    "trend_witness",
    "__version__",
]
