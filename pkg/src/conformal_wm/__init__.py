"""Watermark-score auditing with distribution-free false-positive control.

Given watermark detector p-values for student submissions and a
calibration set of scores from guideline-following essays, this package
decides which submissions carry statistically stronger AI-edit signals
than the permitted editing level can explain, while keeping the
false-positive rate at a chosen significance level. Three decision rules
cover flat calibration pools, grouped historical data, and shifted
minority subgroups; a simulation harness measures their error rates and
detection power end to end on synthetic scores.
"""

from .bleu import BleuScore, TokenizedText, bleu, bleu_of_texts, tokenize
from .conformal import (
    CalibrationSet,
    Decision,
    GroupedCalibrationSet,
    WatermarkScore,
    hierarchical_conformal_p,
    hierarchical_decision,
    standard_conformal_p,
    standard_decision,
    weighted_conformal_decision,
)
from .density import (
    DensityModel,
    DensityUnderflowError,
    ShiftEstimate,
    WeightVector,
    compute_weights,
    empirical_quantile,
    fit_kde,
    mean_shift,
    quantile_shift,
)
from .evaluation import (
    AggregateRow,
    CellResult,
    MetricsReport,
    NoOutliersError,
    aggregate,
    compute_fpr,
    compute_power,
    is_excluded,
)
from .labeling import EditRecord, ViolationLabel, bleu_quantile_threshold, classify
from .simulate import (
    ExperimentConfig,
    ScoreDistribution,
    default_config,
    generate_scores,
    run_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "BleuScore", "TokenizedText", "bleu", "bleu_of_texts", "tokenize",
    "CalibrationSet", "Decision", "GroupedCalibrationSet", "WatermarkScore",
    "hierarchical_conformal_p", "hierarchical_decision", "standard_conformal_p",
    "standard_decision", "weighted_conformal_decision",
    "DensityModel", "DensityUnderflowError", "ShiftEstimate", "WeightVector",
    "compute_weights", "empirical_quantile", "fit_kde", "mean_shift",
    "quantile_shift",
    "AggregateRow", "CellResult", "MetricsReport", "NoOutliersError", "aggregate",
    "compute_fpr", "compute_power", "is_excluded",
    "EditRecord", "ViolationLabel", "bleu_quantile_threshold", "classify",
    "ExperimentConfig", "ScoreDistribution", "default_config", "generate_scores",
    "run_scenario",
    "__version__",
]
