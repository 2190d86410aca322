"""Convert raw level series into the model-ready representation.

Per-variable order of transforms: seasonal adjustment (monthly/quarterly
only), then period-over-period growth rates, then standardization fitted on
the training span, then alignment to a monthly grid, then zero-fill of the
missing cells.  Because series are standardized first, filling with 0 is a
training-span mean imputation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    AllMissing,
    EmptyOverlap,
    InsufficientData,
    NonPositiveBase,
    NotApplicable,
    ZeroVariance,
)
from .series import (
    Frequency,
    Observation,
    TimeSeries,
    YearRange,
    month_index,
    period_to_month,
)
from .vintage import DatasetSnapshot


@dataclass(frozen=True)
class MonthSpan:
    """Inclusive, contiguous span of month indices."""

    start: int
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError(f"empty month span {self.start}..{self.end}")

    def __len__(self) -> int:
        return self.end - self.start + 1

    def __contains__(self, month: int) -> bool:
        return self.start <= month <= self.end


@dataclass(frozen=True)
class AlignedColumn:
    """One variable on a contiguous monthly grid; None marks a missing month."""

    variable_id: str
    span: MonthSpan
    values: tuple[float | None, ...]

    def __post_init__(self):
        if len(self.values) != len(self.span):
            raise ValueError("values length does not match span")

    def value_at(self, month: int) -> float | None:
        if month not in self.span:
            return None
        return self.values[month - self.span.start]


@dataclass(frozen=True)
class StandardizationParams:
    mean: float
    sd: float
    fitted_on: YearRange

    def __post_init__(self):
        if not self.sd > 0:
            raise ValueError("sd must be positive")


@dataclass(frozen=True)
class DesignMatrix:
    """Window of aligned, transformed, filled monthly values for one target year.

    Rows are consecutive months in chronological order; the last row is
    December of the target year.  Columns follow variable_ids.  n_filled
    counts the cells that were imputed rather than observed.
    """

    target_year: int
    window: np.ndarray
    n_timesteps: int
    variable_ids: tuple[str, ...]
    n_filled: int

    def __post_init__(self):
        if self.window.shape != (self.n_timesteps, len(self.variable_ids)):
            raise ValueError("window shape inconsistent with n_timesteps/variables")
        if not np.all(np.isfinite(self.window)):
            raise ValueError("design matrix contains non-finite values")


def growth_rate(s: TimeSeries) -> TimeSeries:
    """Period-over-period growth, v_t / v_{t-1} - 1, for consecutive periods.

    Gaps produce no output period.  Raises NonPositiveBase if a zero or
    negative level is used as a denominator, InsufficientData if the series
    has no consecutive pair at all.
    """
    out: list[Observation] = []
    for prev, cur in zip(s.observations, s.observations[1:]):
        if cur.period != prev.period.successor():
            continue
        if prev.value <= 0:
            raise NonPositiveBase(
                f"series {s.id!r}: level {prev.value!r} at {prev.period.label()} "
                "cannot be a growth-rate base"
            )
        out.append(Observation(cur.period, cur.value / prev.value - 1.0))
    if not out:
        raise InsufficientData(
            f"series {s.id!r} has no consecutive-period pair to difference")
    return s.with_observations(out)


def log_growth_rate(s: TimeSeries) -> TimeSeries:
    """ln(v_t / v_{t-1}) over consecutive periods; same gap/error rules."""
    out: list[Observation] = []
    for prev, cur in zip(s.observations, s.observations[1:]):
        if cur.period != prev.period.successor():
            continue
        if prev.value <= 0 or cur.value <= 0:
            raise NonPositiveBase(
                f"series {s.id!r}: non-positive level around {cur.period.label()}")
        out.append(Observation(cur.period, math.log(cur.value / prev.value)))
    if not out:
        raise InsufficientData(
            f"series {s.id!r} has no consecutive-period pair to difference")
    return s.with_observations(out)


def reconstruct_level(initial_level: float, growths: Sequence[float]) -> list[float]:
    """Inverse of growth_rate: l_0 = initial_level, l_t = l_{t-1} * (1 + g_t)."""
    if not initial_level > 0:
        raise ValueError("initial_level must be positive")
    levels = [float(initial_level)]
    for g in growths:
        levels.append(levels[-1] * (1.0 + g))
    return levels


def seasonal_adjust(s: TimeSeries) -> TimeSeries:
    """Classical additive decomposition: subtract a per-subperiod seasonal index.

    The trend is a centered moving average of window = periods-per-year
    (half-weights at the ends for even windows); the seasonal index per
    subperiod is the mean of (value - trend), re-centered to sum to zero.
    Output covers the same periods as the input.

    Requires a monthly or quarterly series with at least two complete,
    gap-free cycles of consecutive observations.
    """
    if s.frequency is Frequency.ANNUAL:
        raise NotApplicable("seasonal adjustment is undefined for annual series")
    ppy = s.frequency.periods_per_year
    n = len(s.observations)
    if n < 2 * ppy:
        raise InsufficientData(
            f"series {s.id!r} has {n} observations; "
            f"need at least {2 * ppy} (two complete cycles)"
        )
    for prev, cur in zip(s.observations, s.observations[1:]):
        if cur.period != prev.period.successor():
            raise InsufficientData(
                f"series {s.id!r} has a gap after {prev.period.label()}; "
                "seasonal adjustment needs consecutive observations"
            )

    values = np.array([o.value for o in s.observations], dtype=float)
    half = ppy // 2
    if ppy % 2 == 0:
        # 2 x ppy moving average: half-weights on the two end points
        weights = np.full(ppy + 1, 1.0 / ppy)
        weights[0] = weights[-1] = 0.5 / ppy
    else:
        weights = np.full(ppy, 1.0 / ppy)
    width = len(weights)
    trend = np.full(n, np.nan)
    for i in range(half, n - (width - 1 - half)):
        window = values[i - half:i - half + width]
        trend[i] = float(np.dot(window, weights))

    detrended = values - trend
    subperiods = np.array([o.period.subperiod for o in s.observations])
    index = np.zeros(ppy)
    for sp in range(1, ppy + 1):
        mask = (subperiods == sp) & ~np.isnan(detrended)
        if not mask.any():
            raise InsufficientData(
                f"series {s.id!r}: no trend-covered observation for subperiod {sp}")
        index[sp - 1] = float(detrended[mask].mean())
    index -= index.mean()

    adjusted = [
        Observation(o.period, o.value - index[o.period.subperiod - 1])
        for o in s.observations
    ]
    return s.with_observations(adjusted)


def standardize_fit(s: TimeSeries, fit_range: YearRange) -> StandardizationParams:
    """Mean and population standard deviation from observations in fit_range only."""
    inside = [o.value for o in s.observations if o.period.year in fit_range]
    if len(inside) < 2:
        raise InsufficientData(
            f"series {s.id!r} has {len(inside)} observations in "
            f"{fit_range.start}..{fit_range.end}; need at least 2"
        )
    arr = np.asarray(inside, dtype=float)
    mean = float(arr.mean())
    sd = float(arr.std())  # population sd (divide by n)
    if sd == 0.0:
        raise ZeroVariance(f"series {s.id!r} is constant over the fit range")
    return StandardizationParams(mean=mean, sd=sd, fitted_on=fit_range)


def standardize_apply(s: TimeSeries, params: StandardizationParams) -> TimeSeries:
    """z_t = (v_t - mean) / sd for every observation, inside or outside fit_range."""
    out = [
        Observation(o.period, (o.value - params.mean) / params.sd)
        for o in s.observations
    ]
    return s.with_observations(out)


def align_to_monthly(s: TimeSeries, span: MonthSpan) -> AlignedColumn:
    """Place each observation at the final month of its period; other grid
    months are missing.  Monthly series map one-to-one."""
    values: list[float | None] = [None] * len(span)
    placed = 0
    for o in s.observations:
        m = period_to_month(o.period)
        if m in span:
            values[m - span.start] = o.value
            placed += 1
    if placed == 0:
        raise EmptyOverlap(
            f"series {s.id!r} has no observation inside months "
            f"{span.start}..{span.end}"
        )
    return AlignedColumn(variable_id=s.id, span=span, values=tuple(values))


def fill_missing(col: AlignedColumn, fill_value: float = 0.0) -> AlignedColumn:
    """Replace every missing month with fill_value (0 = training-span mean
    once series are standardized).  Raises AllMissing for an empty column."""
    if all(v is None for v in col.values):
        raise AllMissing(f"column {col.variable_id!r} has no present value")
    filled = tuple(fill_value if v is None else v for v in col.values)
    return AlignedColumn(col.variable_id, col.span, filled)


def build_design_matrix(
    columns: Sequence[AlignedColumn],
    target_year: int,
    n_timesteps: int,
    snapshot: DatasetSnapshot,
) -> DesignMatrix:
    """Window of the n_timesteps months ending at December of target_year.

    A cell holds the transformed value only if the underlying period's
    publication date is on or before the snapshot vintage; all other cells
    are filled with 0.  An entirely filled window is legitimate (it is the
    no-data-yet nowcast at the start of a trace); AllMissing is raised only
    when every variable is entirely unpublished at the vintage, window or
    not.
    """
    if n_timesteps < 1:
        raise ValueError("n_timesteps must be >= 1")
    if all(snapshot.cutoffs.get(col.variable_id) is None for col in columns):
        raise AllMissing(
            f"no variable has any published observation at vintage "
            f"{snapshot.vintage}"
        )
    end = month_index(target_year, 12)
    start = end - n_timesteps + 1
    window = np.zeros((n_timesteps, len(columns)))
    n_filled = 0
    for j, col in enumerate(columns):
        lag = snapshot.pool[col.variable_id].schedule.lag_months
        for i, m in enumerate(range(start, end + 1)):
            v = col.value_at(m)
            if v is not None and m + lag <= snapshot.vintage.index:
                window[i, j] = v
            else:
                n_filled += 1
    return DesignMatrix(
        target_year=target_year,
        window=window,
        n_timesteps=n_timesteps,
        variable_ids=tuple(c.variable_id for c in columns),
        n_filled=n_filled,
    )
