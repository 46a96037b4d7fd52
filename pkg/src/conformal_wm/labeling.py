"""Ground-truth labels separating clear violations from borderline ones.

A test essay that was edited outside the guideline is an *outlier* when the
edit changed it substantially: its similarity to the original must be both
(1) lower than the similarity the permitted edit would have produced, and
(2) below a low quantile of the reference similarity population. Every
other guideline-breaking essay is a *suspect*: a violation, but one whose
text barely moved. Essays edited within the guideline are inliers and are
tagged upstream; they never reach :func:`classify`.

Labels exist only so simulated false-positive rates and detection power
can be measured against a defensible notion of "clear violation"; nothing
here is computable for real submissions, where originals are unavailable.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .conformal import WatermarkScore
from .density import empirical_quantile


class ViolationLabel(Enum):
    INLIER = "inlier"
    SUSPECT = "suspect"
    OUTLIER = "outlier"


@dataclass(frozen=True)
class EditRecord:
    """Similarities and score for one essay that received a violating edit."""

    essay_id: str
    bleu_null: float  # similarity of the permitted edit to the original
    bleu_alt: float  # similarity of the violating edit to the original
    score_alt: WatermarkScore

    def __post_init__(self):
        for name, v in (("bleu_null", self.bleu_null), ("bleu_alt", self.bleu_alt)):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"bleu_out_of_range: {name}={v}")


def bleu_quantile_threshold(bleu_values: Sequence[float], alpha: float) -> float:
    """Empirical alpha-quantile of a similarity population.

    Shares the interpolation convention of
    :func:`conformal_wm.density.empirical_quantile` so labeling thresholds
    and density-shift anchors never disagree about what a quantile is.
    """
    if len(bleu_values) == 0:
        raise ValueError("empty_bleu_values")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha_out_of_range: {alpha}")
    return empirical_quantile(bleu_values, alpha)


def classify(record: EditRecord, threshold: float) -> ViolationLabel:
    """Label one violating edit as OUTLIER or SUSPECT.

    Both conditions are strict, so equality in either one falls back to
    SUSPECT (fewer "clear violations", never more).
    """
    if record.bleu_null > record.bleu_alt and record.bleu_alt < threshold:
        return ViolationLabel.OUTLIER
    return ViolationLabel.SUSPECT
