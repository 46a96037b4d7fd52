"""Rank-based calibration p-values and flagging decisions.

Three decision rules over watermark detector scores, all distribution-free:

* standard: rank of the test score inside one exchangeable calibration set,
  ``(1 + #{s_i <= s}) / (n + 1)``;
* hierarchical: the calibration data comes in groups (e.g. one group per
  past assignment) and each group contributes its within-group fraction of
  scores at or below the test score,
  ``(1 + sum_k count_k/n_k) / (K + 1)``;
* weighted: calibration points carry normalized importance weights to
  absorb a known covariate shift; the test essay is flagged when the
  weighted mass at or below its score falls strictly under alpha.

Flag inequalities differ on purpose: standard and hierarchical flag on
``p <= alpha`` while the weighted rule flags on ``weighted mass < alpha``.
The asymmetry is kept exactly as each guarantee is stated; the two can
disagree only when the mass equals alpha to the last bit.

Ties are counted by ``<=`` (no randomized tie-breaking), which can only
inflate p-values and therefore never costs validity. Comparisons are made
on raw scores: any strictly increasing transform (log10 included) leaves
every p-value untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .density import WeightVector

METHOD_STANDARD = "standard"
METHOD_HIERARCHICAL = "hierarchical"
METHOD_WEIGHTED = "weighted"


@dataclass(frozen=True)
class WatermarkScore:
    """A watermark detector p-value for one essay, in (0, 1]."""

    essay_id: str
    value: float

    def __post_init__(self):
        if not 0.0 < self.value <= 1.0:
            raise ValueError(
                f"score_out_of_range: {self.value!r} for essay {self.essay_id!r}"
            )

    @property
    def log_value(self) -> float:
        """log10 of the score, recomputed on demand."""
        return math.log10(self.value)


@dataclass(frozen=True)
class CalibrationSet:
    """Scores of essays known to follow the permitted editing guideline."""

    scores: tuple[WatermarkScore, ...]
    provenance: str = ""

    def __post_init__(self):
        if len(self.scores) == 0:
            raise ValueError("empty_calibration")

    def __len__(self) -> int:
        return len(self.scores)

    def values(self) -> np.ndarray:
        return np.array([s.value for s in self.scores], dtype=float)

    def log_values(self) -> np.ndarray:
        return np.array([s.log_value for s in self.scores], dtype=float)

    @classmethod
    def from_values(cls, values: Iterable[float], provenance: str = "") -> "CalibrationSet":
        scores = tuple(
            WatermarkScore(essay_id=f"{provenance or 'cal'}-{i}", value=float(v))
            for i, v in enumerate(values)
        )
        return cls(scores=scores, provenance=provenance)


@dataclass(frozen=True)
class GroupedCalibrationSet:
    """K nonempty calibration groups, exchangeable at the group level."""

    groups: tuple[CalibrationSet, ...]

    def __post_init__(self):
        if len(self.groups) == 0:
            raise ValueError("empty_group_collection")

    def __len__(self) -> int:
        return len(self.groups)

    def flatten(self) -> CalibrationSet:
        scores = tuple(s for g in self.groups for s in g.scores)
        return CalibrationSet(scores=scores, provenance="flattened")


@dataclass(frozen=True)
class Decision:
    """Outcome of one flagging decision.

    The flag must match the method's rule: p <= alpha for standard and
    hierarchical, strictly < alpha for weighted.
    """

    conformal_p: float
    flagged: bool
    alpha: float
    method: str

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha_out_of_range: {self.alpha}")
        if self.method in (METHOD_STANDARD, METHOD_HIERARCHICAL):
            if not 0.0 < self.conformal_p <= 1.0:
                raise ValueError(f"conformal_p_out_of_range: {self.conformal_p}")
            expected = self.conformal_p <= self.alpha
        elif self.method == METHOD_WEIGHTED:
            # the weighted mass is a sum of nonnegative weights and can
            # vanish outright when the test point sits below every
            # calibration score with an underflowed density ratio
            if not 0.0 <= self.conformal_p <= 1.0:
                raise ValueError(f"conformal_p_out_of_range: {self.conformal_p}")
            expected = self.conformal_p < self.alpha
        else:
            raise ValueError(f"unknown_method: {self.method}")
        if self.flagged != expected:
            raise ValueError("flag_rule_violation")


def standard_conformal_p(cal: CalibrationSet, s: WatermarkScore) -> float:
    """p-value (1 + #{s_i <= s}) / (n + 1); lies on the grid k/(n+1), k=1..n+1."""
    count = sum(1 for t in cal.scores if t.value <= s.value)
    return (1 + count) / (len(cal) + 1)


def hierarchical_conformal_p(cal: GroupedCalibrationSet, s: WatermarkScore) -> float:
    """p-value (1 + sum_k count_k/n_k) / (K + 1).

    Each group contributes its within-group fraction of scores <= s, so a
    group of 3 essays carries the same total weight as a group of 300.
    With all groups singletons this reduces exactly (bit for bit) to
    :func:`standard_conformal_p` on the flattened set.
    """
    fracs = []
    for k, group in enumerate(cal.groups, start=1):
        if len(group) == 0:  # unreachable through the constructor, kept as a guard
            raise ValueError(f"empty_group({k})")
        count = sum(1 for t in group.scores if t.value <= s.value)
        fracs.append(count / len(group))
    # fsum keeps the sum independent of group order, so permuting groups
    # leaves the p-value bit-identical.
    return (1.0 + math.fsum(fracs)) / (len(cal) + 1)


def standard_decision(cal: CalibrationSet, s: WatermarkScore, alpha: float) -> Decision:
    p = standard_conformal_p(cal, s)
    return Decision(conformal_p=p, flagged=p <= alpha, alpha=alpha, method=METHOD_STANDARD)


def hierarchical_decision(
    cal: GroupedCalibrationSet, s: WatermarkScore, alpha: float
) -> Decision:
    p = hierarchical_conformal_p(cal, s)
    return Decision(
        conformal_p=p, flagged=p <= alpha, alpha=alpha, method=METHOD_HIERARCHICAL
    )


def weighted_conformal_decision(
    cal: CalibrationSet,
    s: WatermarkScore,
    weights: WeightVector,
    alpha: float,
) -> Decision:
    """Weighted decision: flag when weighted mass at or below s is strictly < alpha.

    ``weights`` must hold one weight per calibration score plus one for the
    test point (validated for length here; nonnegativity and normalization
    are enforced by :class:`~conformal_wm.density.WeightVector` itself).
    """
    if weights.n != len(cal):
        raise ValueError(
            f"weight_length_mismatch: {weights.n} calibration weights for "
            f"{len(cal)} calibration scores"
        )
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha_out_of_range: {alpha}")
    mass = math.fsum(
        w for t, w in zip(cal.scores, weights.calibration_weights) if t.value <= s.value
    )
    p = min(mass + weights.test_weight, 1.0)
    return Decision(conformal_p=p, flagged=p < alpha, alpha=alpha, method=METHOD_WEIGHTED)


# ---------------------------------------------------------------------------
# Vectorized kernels. Same arithmetic as the scalar operations, applied to
# whole batches; the simulation harness and the acceptance suite run on
# these. ``standard_p_batch`` matches the scalar op bit for bit.
# ---------------------------------------------------------------------------


def standard_p_values(cal_values: np.ndarray, test_values: np.ndarray) -> np.ndarray:
    """Standard p-values of many test scores against one calibration set."""
    cal = np.sort(np.asarray(cal_values, dtype=float))
    tests = np.asarray(test_values, dtype=float)
    counts = np.searchsorted(cal, tests, side="right")
    return (1.0 + counts) / (cal.size + 1.0)


def standard_p_batch(cal_rows: np.ndarray, test_values: np.ndarray) -> np.ndarray:
    """Row i: p-value of test_values[i] against calibration row cal_rows[i]."""
    cal = np.asarray(cal_rows, dtype=float)
    tests = np.asarray(test_values, dtype=float)
    counts = (cal <= tests[:, np.newaxis]).sum(axis=1)
    return (1.0 + counts) / (cal.shape[1] + 1.0)


def hierarchical_p_values(
    groups: Sequence[np.ndarray], test_values: np.ndarray
) -> np.ndarray:
    """Hierarchical p-values of many test scores against one grouped calibration."""
    tests = np.asarray(test_values, dtype=float)
    total = np.zeros_like(tests)
    for g in groups:
        arr = np.sort(np.asarray(g, dtype=float))
        if arr.size == 0:
            raise ValueError("empty_group")
        total += np.searchsorted(arr, tests, side="right") / arr.size
    return (1.0 + total) / (len(groups) + 1.0)


def hierarchical_p_batch(
    group_rows: Sequence[np.ndarray], test_values: np.ndarray
) -> np.ndarray:
    """Row-wise hierarchical p-values for per-trial grouped calibration data.

    ``group_rows[k]`` is an (R, n_k) array: trial r of group k. Group sizes
    may differ between groups but are fixed across trials.
    """
    tests = np.asarray(test_values, dtype=float)
    total = np.zeros_like(tests)
    for block in group_rows:
        arr = np.asarray(block, dtype=float)
        total += (arr <= tests[:, np.newaxis]).mean(axis=1)
    return (1.0 + total) / (len(group_rows) + 1.0)


def weighted_p_values(
    cal_values: np.ndarray,
    cal_ratios: np.ndarray,
    test_values: np.ndarray,
    test_ratios: np.ndarray,
) -> np.ndarray:
    """Weighted masses for many test points sharing one calibration set.

    ``cal_ratios``/``test_ratios`` are the raw (unnormalized) density ratios;
    normalization happens per test point, since the test point's own ratio
    enters its denominator.
    """
    cal = np.asarray(cal_values, dtype=float)
    r_cal = np.asarray(cal_ratios, dtype=float)
    tests = np.asarray(test_values, dtype=float)
    r_test = np.asarray(test_ratios, dtype=float)
    if not (np.isfinite(r_cal).all() and np.isfinite(r_test).all()):
        raise ValueError("density_underflow: non-finite importance ratio")
    order = np.argsort(cal, kind="stable")
    cal_sorted = cal[order]
    prefix = np.concatenate([[0.0], np.cumsum(r_cal[order])])
    idx = np.searchsorted(cal_sorted, tests, side="right")
    mass = prefix[idx] + r_test
    denom = prefix[-1] + r_test
    if (denom <= 0.0).any():
        raise ValueError("density_underflow: importance ratios sum to zero")
    return np.minimum(mass / denom, 1.0)
