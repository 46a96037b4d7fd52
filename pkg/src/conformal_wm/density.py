"""Density estimation and importance weighting for shifted calibration pools.

The pooled calibration density is a Gaussian kernel density estimate (KDE)
over log10 watermark scores. The density of a small target subgroup is not
re-estimated from its handful of points; instead the pool KDE is queried
through an affine map whose anchors come either from sample means ("mean
shift") or from robust lower quantiles ("quantile shift"). Normalized
ratios of the two densities become the importance weights consumed by the
weighted conformal decision rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

# Floor applied to the pool density before ratios are formed, so a deep-tail
# query degrades to a huge-but-finite ratio instead of dividing by zero.
DENSITY_FLOOR = 1e-300

# Sample standard deviations below this are treated as degenerate (e.g. a
# constant minority sample) and floored so the affine map stays defined.
SIGMA_FLOOR = 1e-8

_GAUSS_NORM = math.sqrt(2.0 * math.pi)


class DensityUnderflowError(ValueError):
    """A density ratio became non-finite (or all ratios vanished)."""

    def __init__(self, point: float, detail: str = ""):
        self.point = point
        msg = f"density_underflow at point {point!r}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


def empirical_quantile(values: Sequence[float], level: float) -> float:
    """Empirical quantile with midpoint plotting positions.

    The k-th order statistic (1-based) sits at level (k - 0.5)/m and the
    quantile interpolates linearly between adjacent order statistics,
    clamping to the sample minimum/maximum outside that range. The same
    convention is shared by every quantile in this package so thresholds
    and shift anchors stay mutually consistent.
    """
    if len(values) == 0:
        raise ValueError("empty_values: quantile of an empty sample")
    if not 0.0 <= level <= 1.0:
        raise ValueError(f"level_out_of_range: {level}")
    xs = sorted(float(v) for v in values)
    m = len(xs)
    h = m * level + 0.5
    if h <= 1.0:
        return xs[0]
    if h >= m:
        return xs[-1]
    j = int(math.floor(h))
    g = h - j
    return xs[j - 1] + g * (xs[j] - xs[j - 1])


@dataclass(frozen=True)
class ShiftEstimate:
    """Anchors and spreads defining the pool-to-subgroup affine map."""

    method: str  # "mean" or "quantile"
    q_anchor: float
    p_anchor: float
    sigma_p: float
    sigma_q: float
    branch: str | None = None  # quantile method: "min", "2alpha" or "alpha"

    def __post_init__(self):
        if self.sigma_p <= 0 or self.sigma_q <= 0:
            raise ValueError("sigma_not_positive")


@dataclass(frozen=True, eq=False)
class DensityModel:
    """Gaussian KDE evaluated through an affine query transform.

    With the identity transform (scale=1, offset=0) this is the pool
    density itself. A shifted model evaluates the same KDE at
    ``scale * x + offset``, which realizes the subgroup density as an
    affinely relocated copy of the pool density. No Jacobian factor is
    applied: weights are formed from normalized ratios, so constant
    factors cancel.
    """

    support_points: tuple[float, ...]
    bandwidth: float
    scale: float = 1.0
    offset: float = 0.0
    shift: ShiftEstimate | None = None

    def __post_init__(self):
        if len(self.support_points) == 0:
            raise ValueError("empty_support: KDE needs at least one point")
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth_not_positive: {self.bandwidth}")
        if not self.scale > 0:
            raise ValueError(f"scale_not_positive: {self.scale}")

    @cached_property
    def _support(self) -> np.ndarray:
        return np.asarray(self.support_points, dtype=float)

    @property
    def is_identity(self) -> bool:
        return self.scale == 1.0 and self.offset == 0.0

    def evaluate(self, x):
        """Density at ``x`` (scalar or array-like), vectorized."""
        arr = np.asarray(x, dtype=float)
        query = self.scale * arr + self.offset
        z = (query[..., np.newaxis] - self._support) / self.bandwidth
        dens = np.exp(-0.5 * z * z).sum(axis=-1)
        dens /= self._support.size * self.bandwidth * _GAUSS_NORM
        if arr.ndim == 0:
            return float(dens)
        return dens


@dataclass(frozen=True)
class WeightVector:
    """Normalized importance weights for n calibration points plus the test point."""

    calibration_weights: tuple[float, ...]
    test_weight: float

    def __post_init__(self):
        entries = (*self.calibration_weights, self.test_weight)
        if any(w < 0 for w in entries):
            raise ValueError("negative_weight")
        total = math.fsum(entries)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights_not_normalized: sum={total!r}")

    @property
    def n(self) -> int:
        return len(self.calibration_weights)

    @classmethod
    def uniform(cls, n: int) -> "WeightVector":
        w = 1.0 / (n + 1)
        return cls(calibration_weights=(w,) * n, test_weight=w)


def fit_kde(log_scores: Sequence[float], bandwidth: float) -> DensityModel:
    """Fit a Gaussian KDE with a fixed absolute bandwidth.

    scipy's gaussian_kde rescales its bandwidth by the sample deviation,
    which would silently change the smoothing as the pool changes; the
    bandwidth here is the literal kernel width.
    """
    pts = tuple(float(v) for v in log_scores)
    return DensityModel(support_points=pts, bandwidth=float(bandwidth))


def _spread(values: np.ndarray) -> float:
    return max(float(np.std(values)), SIGMA_FLOOR)


def mean_shift(
    pool_logs: Sequence[float],
    minority_logs: Sequence[float],
    bandwidth: float,
) -> DensityModel:
    """Subgroup density from the pool KDE, anchored at the two sample means.

    A query x is standardized with the minority moments and re-expressed in
    pool coordinates before the pool KDE is evaluated:
    ``x -> ((x - mean_q) / sigma_q) * sigma_p + mean_p``.
    """
    pool = np.asarray(pool_logs, dtype=float)
    minority = np.asarray(minority_logs, dtype=float)
    if pool.size == 0:
        raise ValueError("empty_pool")
    if minority.size == 0:
        raise ValueError("empty_minority")
    est = ShiftEstimate(
        method="mean",
        q_anchor=float(np.mean(minority)),
        p_anchor=float(np.mean(pool)),
        sigma_p=_spread(pool),
        sigma_q=_spread(minority),
    )
    return _shifted_model(pool, bandwidth, est)


def quantile_shift(
    pool_logs: Sequence[float],
    minority_logs: Sequence[float],
    bandwidth: float,
    alpha: float,
) -> DensityModel:
    """Subgroup density anchored at lower-tail quantiles instead of means.

    The minority anchor level adapts to the minority sample size m:

    * m <= 1/(2 alpha): the alpha-quantile of m points is hopeless, so the
      minority anchor is its minimum and the pool anchor is the pool
      quantile at level 1/m (the level the minimum of m draws estimates).
    * m <= 1/alpha: both anchors at the more conservative 2*alpha level.
    * otherwise: both anchors at level alpha.

    This targets the tail where flagging decisions actually happen, which
    matters when the subgroup shift is stronger in the tail than in the
    bulk.
    """
    pool = np.asarray(pool_logs, dtype=float)
    minority = np.asarray(minority_logs, dtype=float)
    if pool.size == 0:
        raise ValueError("empty_pool")
    if minority.size == 0:
        raise ValueError("empty_minority")
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha_out_of_range: {alpha}")
    m = minority.size
    # Branch conditions are m <= 1/(2a) and m <= 1/a, written multiplicatively
    # so integer boundaries (e.g. m=10 at alpha=0.05) are decided exactly.
    if m * 2.0 * alpha <= 1.0:
        branch = "min"
        q_anchor = float(np.min(minority))
        p_anchor = empirical_quantile(pool, 1.0 / m)
    elif m * alpha <= 1.0:
        branch = "2alpha"
        q_anchor = empirical_quantile(minority, 2.0 * alpha)
        p_anchor = empirical_quantile(pool, 2.0 * alpha)
    else:
        branch = "alpha"
        q_anchor = empirical_quantile(minority, alpha)
        p_anchor = empirical_quantile(pool, alpha)
    est = ShiftEstimate(
        method="quantile",
        q_anchor=q_anchor,
        p_anchor=p_anchor,
        sigma_p=_spread(pool),
        sigma_q=_spread(minority),
        branch=branch,
    )
    return _shifted_model(pool, bandwidth, est)


def _shifted_model(pool: np.ndarray, bandwidth: float, est: ShiftEstimate) -> DensityModel:
    scale = est.sigma_p / est.sigma_q
    offset = est.p_anchor - est.q_anchor * scale
    return DensityModel(
        support_points=tuple(float(v) for v in pool),
        bandwidth=float(bandwidth),
        scale=scale,
        offset=offset,
        shift=est,
    )


def _normalize_ratios(ratios: np.ndarray, points: np.ndarray) -> WeightVector:
    bad = ~np.isfinite(ratios)
    if bad.any():
        i = int(np.argmax(bad))
        raise DensityUnderflowError(float(points[i]), "non-finite density ratio")
    total = float(ratios.sum())
    if not (math.isfinite(total) and total > 0.0):
        raise DensityUnderflowError(float(points[-1]), "ratios sum to zero")
    w = ratios / total
    return WeightVector(
        calibration_weights=tuple(float(v) for v in w[:-1]),
        test_weight=float(w[-1]),
    )


def density_ratios(
    model_p: DensityModel,
    model_q: DensityModel,
    points,
) -> np.ndarray:
    """Raw q/p ratios at the given points, with the pool density floored."""
    pts = np.asarray(points, dtype=float)
    p = np.maximum(np.asarray(model_p.evaluate(pts), dtype=float), DENSITY_FLOOR)
    q = np.asarray(model_q.evaluate(pts), dtype=float)
    return q / p


def compute_weights(
    model_p: DensityModel,
    model_q: DensityModel,
    cal_logs: Sequence[float],
    test_log: float,
) -> WeightVector:
    """Normalized importance weights for the calibration points and the test point.

    Each point x gets raw ratio q(x)/p(x); the vector of ratios over the n
    calibration points plus the test point is normalized to sum to one.
    Identical densities therefore give the uniform vector 1/(n+1).
    """
    points = np.append(np.asarray(cal_logs, dtype=float), float(test_log))
    ratios = density_ratios(model_p, model_q, points)
    return _normalize_ratios(ratios, points)
