"""Shared plumbing that assembles model inputs from a raw series pool.

Series are transformed once on the full data (seasonal adjustment where
applicable, growth rates, standardization fitted on the training span);
vintage degradation then masks individual cells by publication date.  This
mirrors generating synthetic vintages by introducing missing values into an
already-transformed dataset.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import InsufficientData
from .series import Frequency, TimeSeries, YearRange, month_index
from .transform import (
    AlignedColumn,
    DesignMatrix,
    MonthSpan,
    StandardizationParams,
    align_to_monthly,
    build_design_matrix,
    growth_rate,
    log_growth_rate,
    seasonal_adjust,
    standardize_apply,
    standardize_fit,
)
from .vintage import DatasetSnapshot


@dataclass(frozen=True)
class TransformOptions:
    seasonal_adjust: bool = True
    growth: str = "simple"  # "simple" or "log"

    def __post_init__(self):
        if self.growth not in ("simple", "log"):
            raise ValueError(f"growth must be 'simple' or 'log', got {self.growth!r}")


@dataclass(frozen=True)
class VariablePanel:
    """Transformed, standardized, monthly-aligned explanatory variables."""

    variable_ids: tuple[str, ...]
    columns: Mapping[str, AlignedColumn]
    standardization: Mapping[str, StandardizationParams]
    span: MonthSpan

    def column_list(self) -> list[AlignedColumn]:
        return [self.columns[v] for v in self.variable_ids]


def transform_to_growth(series: TimeSeries, options: TransformOptions) -> TimeSeries:
    """Seasonal adjustment (monthly/quarterly only) followed by growth rates."""
    s = series
    if options.seasonal_adjust and s.frequency is not Frequency.ANNUAL:
        s = seasonal_adjust(s)
    if options.growth == "log":
        return log_growth_rate(s)
    return growth_rate(s)


def build_panel(
    pool: Mapping[str, TimeSeries],
    variable_ids: Sequence[str],
    fit_years: YearRange,
    span: MonthSpan,
    options: TransformOptions,
    standardization: Mapping[str, StandardizationParams] | None = None,
) -> VariablePanel:
    """Transform each variable and align it to the monthly span.

    Pass existing standardization params (e.g. from a trained model) to
    reproduce the exact inputs a model was trained on; otherwise they are
    fitted on fit_years.
    """
    columns: dict[str, AlignedColumn] = {}
    params_out: dict[str, StandardizationParams] = {}
    for var in variable_ids:
        if var not in pool:
            raise KeyError(f"variable {var!r} not in pool")
        growth = transform_to_growth(pool[var], options)
        if standardization is not None and var in standardization:
            params = standardization[var]
        else:
            params = standardize_fit(growth, fit_years)
        standardized = standardize_apply(growth, params)
        columns[var] = align_to_monthly(standardized, span)
        params_out[var] = params
    return VariablePanel(
        variable_ids=tuple(variable_ids),
        columns=columns,
        standardization=params_out,
        span=span,
    )


def panel_span(first_target_year: int, last_target_year: int, max_timesteps: int) -> MonthSpan:
    """Monthly span covering every window the targeted years can request."""
    end = month_index(last_target_year, 12)
    start = month_index(first_target_year, 12) - max_timesteps + 1
    return MonthSpan(start, end)


def target_growth(
    pool: Mapping[str, TimeSeries],
    target_id: str,
    options: TransformOptions,
) -> TimeSeries:
    """Annual growth of the target level series (kept in raw growth units)."""
    if target_id not in pool:
        raise KeyError(f"target {target_id!r} not in pool")
    if options.growth == "log":
        return log_growth_rate(pool[target_id])
    return growth_rate(pool[target_id])


def growth_by_year(growths: TimeSeries) -> dict[int, float]:
    return {o.period.year: o.value for o in growths.observations}


def design_matrix_for_year(
    panel: VariablePanel,
    target_year: int,
    n_timesteps: int,
    snapshot: DatasetSnapshot,
) -> DesignMatrix:
    return build_design_matrix(panel.column_list(), target_year, n_timesteps, snapshot)


def training_dataset(
    panel: VariablePanel,
    growths: Mapping[int, float],
    years: YearRange,
    n_timesteps: int,
    snapshot: DatasetSnapshot,
) -> list[tuple[DesignMatrix, float]]:
    """(window, target growth) pairs for every year in the span."""
    dataset = []
    for year in years.years():
        if year not in growths:
            raise InsufficientData(
                f"target growth for {year} is not available in the pool")
        matrix = design_matrix_for_year(panel, year, n_timesteps, snapshot)
        dataset.append((matrix, growths[year]))
    return dataset
