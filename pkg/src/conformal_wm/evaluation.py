"""False-positive rate and detection power with exclusion-aware averaging.

A *cell* is one measured condition: (method, null edit level, alternative
edit level, calibration size, writing-prompt replicate, seed). Cells whose
violation is negligible — outlier share under 5% of the test set or fewer
than 30 outliers outright — are excluded before any averaging, so neither
their power (meaningless on so few outliers) nor their FPR leaks into
reported means. Aggregation averages the per-prompt values unweighted,
then averages those per-seed values across seeds.

Suspects (violations with barely-changed text) never enter the FPR
denominator (they are not guideline followers) nor the power denominator
(they are not clear violations); their flag rate is kept as a separate
diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from statistics import fmean
from typing import Iterable, Sequence

from .conformal import Decision

MIN_OUTLIER_PROPORTION = 0.05
MIN_OUTLIER_COUNT = 30

AGG_PER_PROMPT_MEAN = "per_prompt_mean"
AGG_POOLED = "pooled"


class NoOutliersError(ValueError):
    def __init__(self):
        super().__init__("no_outliers")


def compute_fpr(decisions: Sequence[Decision]) -> float:
    """Share of guideline-following essays that got flagged."""
    if len(decisions) == 0:
        raise ValueError("empty_decisions")
    return sum(1 for d in decisions if d.flagged) / len(decisions)


def compute_power(decisions: Sequence[Decision]) -> float:
    """Share of labeled outliers that got flagged.

    Raises :class:`NoOutliersError` on an empty list; the caller marks the
    cell excluded instead of reporting a power.
    """
    if len(decisions) == 0:
        raise NoOutliersError()
    return sum(1 for d in decisions if d.flagged) / len(decisions)


def is_excluded(
    n_outliers: int,
    outlier_proportion: float,
    min_count: int = MIN_OUTLIER_COUNT,
    min_proportion: float = MIN_OUTLIER_PROPORTION,
) -> bool:
    """Negligible-violation rule: too small a share, or too few outliers outright."""
    return outlier_proportion < min_proportion or n_outliers < min_count


@dataclass(frozen=True)
class CellResult:
    """Metrics for one measured condition."""

    null_prompt: int
    alt_prompt: int
    cal_size: int
    fpr: float
    power: float | None
    n_outliers: int
    outlier_proportion: float
    excluded: bool
    seed: int = 0
    prompt: int = 1  # writing-prompt replicate, not the edit level
    method: str = "standard"
    n_tests: int = 0  # null-edit test count behind fpr (pooled aggregation weight)
    suspect_flag_rate: float | None = None  # diagnostic only

    def __post_init__(self):
        if not 1 <= self.null_prompt <= 6:
            raise ValueError(f"null_prompt_out_of_range: {self.null_prompt}")
        if not 2 <= self.alt_prompt <= 7:
            raise ValueError(f"alt_prompt_out_of_range: {self.alt_prompt}")
        if self.excluded and self.power is not None:
            raise ValueError("excluded_cell_with_power")
        if not self.excluded and self.power is None:
            raise ValueError("included_cell_missing_power")
        if self.excluded != is_excluded(self.n_outliers, self.outlier_proportion):
            raise ValueError("exclusion_flag_inconsistent")


@dataclass(frozen=True)
class AggregateRow:
    method: str
    null_prompt: int
    alt_prompt: int
    cal_size: int
    fpr: float
    power: float | None
    n_cells: int
    n_outliers_total: int


@dataclass(frozen=True)
class OmittedPair:
    method: str
    null_prompt: int
    alt_prompt: int
    cal_size: int
    reason: str


@dataclass
class MetricsReport:
    cells: list[CellResult]
    seeds: list[int]
    aggregation: str
    rows: list[AggregateRow] = field(default_factory=list)
    omitted: list[OmittedPair] = field(default_factory=list)


def _cell_sort_key(c: CellResult):
    return (c.method, c.null_prompt, c.alt_prompt, c.cal_size, c.seed, c.prompt)


def aggregate(
    cells: Iterable[CellResult],
    over_prompts: Sequence[int] | None = None,
    over_seeds: Sequence[int] | None = None,
    aggregation: str = AGG_PER_PROMPT_MEAN,
) -> MetricsReport:
    """Fold cells into per-condition means.

    Exclusion happens first: excluded cells contribute to no mean. For each
    (method, null, alt, cal_size): per seed, average the surviving prompt
    cells (unweighted under ``per_prompt_mean``; weighted by test counts
    under ``pooled``), then average the per-seed values. Conditions whose
    cells are all excluded are omitted with reason ``negligible_violation``.
    """
    cells = sorted(cells, key=_cell_sort_key)
    if over_prompts is not None:
        wanted_prompts = set(over_prompts)
        cells_in = [c for c in cells if c.prompt in wanted_prompts]
    else:
        cells_in = cells
    if over_seeds is not None:
        wanted_seeds = set(over_seeds)
        cells_in = [c for c in cells_in if c.seed in wanted_seeds]
    if aggregation not in (AGG_PER_PROMPT_MEAN, AGG_POOLED):
        raise ValueError(f"unknown_aggregation: {aggregation}")

    groups: dict[tuple, list[CellResult]] = {}
    for c in cells_in:
        groups.setdefault((c.method, c.null_prompt, c.alt_prompt, c.cal_size), []).append(c)

    rows: list[AggregateRow] = []
    omitted: list[OmittedPair] = []
    for key in sorted(groups):
        method, null_p, alt_p, size = key
        kept = [c for c in groups[key] if not c.excluded]
        if not kept:
            omitted.append(OmittedPair(method, null_p, alt_p, size, "negligible_violation"))
            continue
        fpr_by_seed: list[float] = []
        power_by_seed: list[float] = []
        for seed in sorted({c.seed for c in kept}):
            seed_cells = [c for c in kept if c.seed == seed]
            if aggregation == AGG_PER_PROMPT_MEAN:
                fpr_by_seed.append(fmean(c.fpr for c in seed_cells))
                power_by_seed.append(fmean(c.power for c in seed_cells))
            else:
                fpr_by_seed.append(_weighted_mean(
                    [(c.fpr, c.n_tests) for c in seed_cells]))
                power_by_seed.append(_weighted_mean(
                    [(c.power, c.n_outliers) for c in seed_cells]))
        rows.append(
            AggregateRow(
                method=method,
                null_prompt=null_p,
                alt_prompt=alt_p,
                cal_size=size,
                fpr=fmean(fpr_by_seed),
                power=fmean(power_by_seed),
                n_cells=len(kept),
                n_outliers_total=sum(c.n_outliers for c in kept),
            )
        )

    seeds = sorted({c.seed for c in cells_in})
    return MetricsReport(
        cells=cells, seeds=seeds, aggregation=aggregation, rows=rows, omitted=omitted
    )


def _weighted_mean(pairs: list[tuple[float, int]]) -> float:
    total = sum(w for _, w in pairs)
    if total == 0:
        return fmean(v for v, _ in pairs)
    return sum(v * w for v, w in pairs) / total
