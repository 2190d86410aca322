"""Splits, metrics, naive baselines, vintage backtests, and nowcast traces."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .errors import EmptyInput, InsufficientHistory, LengthMismatch
from .lstm import Hyperparams, TrainedModel, predict, train
from .pipeline import (
    TransformOptions,
    build_panel,
    design_matrix_for_year,
    growth_by_year,
    panel_span,
    target_growth,
    training_dataset,
)
from .series import TimeSeries, YearRange, month_index
from .vintage import (
    VintageDate,
    full_snapshot,
    snapshot_at,
    trace_schedule,
)


@dataclass(frozen=True)
class SplitSpec:
    """Chronologically ordered, disjoint year ranges for train/validation/test."""

    train_years: YearRange
    validation_years: YearRange
    test_years: YearRange

    def __post_init__(self):
        if not (self.train_years.end < self.validation_years.start
                and self.validation_years.end < self.test_years.start):
            raise ValueError("splits must be disjoint and ordered train < validation < test")

    def final_train_years(self) -> YearRange:
        """Span the final model retrains on before test evaluation."""
        return YearRange(self.train_years.start, self.validation_years.end)


def default_splits() -> SplitSpec:
    """Train 2001-2011, validate 2012-2014, test 2015-2018."""
    return SplitSpec(
        train_years=YearRange(2001, 2011),
        validation_years=YearRange(2012, 2014),
        test_years=YearRange(2015, 2018),
    )


@dataclass(frozen=True)
class Metrics:
    mae: float
    rmse: float
    n: int


def mae(preds: Sequence[float], actuals: Sequence[float]) -> float:
    if len(preds) != len(actuals):
        raise LengthMismatch(f"{len(preds)} predictions vs {len(actuals)} actuals")
    if not preds:
        raise EmptyInput("mae over zero points")
    return sum(abs(p - a) for p, a in zip(preds, actuals)) / len(preds)


def rmse(preds: Sequence[float], actuals: Sequence[float]) -> float:
    if len(preds) != len(actuals):
        raise LengthMismatch(f"{len(preds)} predictions vs {len(actuals)} actuals")
    if not preds:
        raise EmptyInput("rmse over zero points")
    return math.sqrt(sum((p - a) ** 2 for p, a in zip(preds, actuals)) / len(preds))


def score(preds: Sequence[float], actuals: Sequence[float]) -> Metrics:
    return Metrics(mae=mae(preds, actuals), rmse=rmse(preds, actuals), n=len(preds))


def naive_baselines(
    growths: TimeSeries,
    years: Iterable[int],
) -> dict[str, dict[int, float]]:
    """Benchmark predictions per year.

    persistence: the previous year's actual growth.  historical_mean: the
    mean of all growths strictly before the predicted year.
    """
    by_year = {o.period.year: o.value for o in growths.observations}
    persistence: dict[int, float] = {}
    historical_mean: dict[int, float] = {}
    for year in years:
        if year - 1 not in by_year:
            raise InsufficientHistory(
                f"no growth for {year - 1}; persistence baseline undefined for {year}")
        history = [v for y, v in by_year.items() if y < year]
        if not history:
            raise InsufficientHistory(f"no growth before {year}")
        persistence[year] = by_year[year - 1]
        historical_mean[year] = sum(history) / len(history)
    return {"persistence": persistence, "historical_mean": historical_mean}


@dataclass(frozen=True)
class VintageMetrics:
    """Metrics at one schedule position, aggregated across evaluation years.

    offset_months is relative to December of each target year (0 = the
    month the target period ends).
    """

    offset_months: int
    metrics: Metrics


@dataclass(frozen=True)
class SplitBacktest:
    split: str
    full_data: Metrics
    by_vintage: tuple[VintageMetrics, ...]


@dataclass(frozen=True)
class BacktestResult:
    validation: SplitBacktest
    test: SplitBacktest


def _fit_and_eval(
    pool: Mapping[str, TimeSeries],
    target_id: str,
    variables: Sequence[str],
    hyper: Hyperparams,
    fit_years: YearRange,
    eval_years: YearRange,
    schedule_fn: Callable[[int], list[VintageDate]] | None,
    options: TransformOptions,
    split_name: str,
) -> SplitBacktest:
    growths = growth_by_year(target_growth(pool, target_id, options))
    span = panel_span(
        min(fit_years.start, eval_years.start), eval_years.end, hyper.n_timesteps)
    panel = build_panel(pool, variables, fit_years, span, options)
    snapshot = full_snapshot(pool)
    model = train(
        training_dataset(panel, growths, fit_years, hyper.n_timesteps, snapshot),
        hyper,
        standardization=panel.standardization,
    )

    eval_year_list = list(eval_years.years())
    for year in eval_year_list:
        if year not in growths:
            raise InsufficientHistory(f"no actual growth for evaluation year {year}")
    actuals = [growths[y] for y in eval_year_list]
    full_preds = [
        predict(model, design_matrix_for_year(panel, y, hyper.n_timesteps, snapshot))
        for y in eval_year_list
    ]

    by_vintage: list[VintageMetrics] = []
    if schedule_fn is not None:
        schedules = {y: schedule_fn(y) for y in eval_year_list}
        lengths = {len(s) for s in schedules.values()}
        if len(lengths) != 1:
            raise ValueError("schedule must yield the same number of vintages per year")
        for k in range(lengths.pop()):
            preds_k = []
            offset = 0
            for y in eval_year_list:
                vintage = schedules[y][k]
                offset = vintage.index - month_index(y, 12)
                matrix = design_matrix_for_year(
                    panel, y, hyper.n_timesteps, snapshot_at(pool, vintage))
                preds_k.append(predict(model, matrix))
            by_vintage.append(VintageMetrics(
                offset_months=offset, metrics=score(preds_k, actuals)))
    return SplitBacktest(
        split=split_name,
        full_data=score(full_preds, actuals),
        by_vintage=tuple(by_vintage),
    )


def backtest(
    pool: Mapping[str, TimeSeries],
    target_id: str,
    variables: Sequence[str],
    hyper: Hyperparams,
    splits: SplitSpec,
    schedule_fn: Callable[[int], list[VintageDate]] | None,
    options: TransformOptions = TransformOptions(),
) -> BacktestResult:
    """Vintage-degraded and full-data metrics for both evaluation splits.

    The validation leg trains on the train span; the test leg retrains on
    train + validation before scoring the test span.
    """
    validation = _fit_and_eval(
        pool, target_id, variables, hyper, splits.train_years,
        splits.validation_years, schedule_fn, options, "validation")
    test = _fit_and_eval(
        pool, target_id, variables, hyper, splits.final_train_years(),
        splits.test_years, schedule_fn, options, "test")
    return BacktestResult(validation=validation, test=test)


@dataclass(frozen=True)
class TracePoint:
    vintage: VintageDate
    growth: float
    level: float


@dataclass(frozen=True)
class NowcastTrace:
    target_year: int
    points: tuple[TracePoint, ...]


def nowcast_trace(
    model: TrainedModel,
    pool: Mapping[str, TimeSeries],
    target_id: str,
    target_year: int,
    options: TransformOptions = TransformOptions(),
) -> NowcastTrace:
    """Growth nowcast at every vintage of the trace schedule.

    The implied level anchors to the most recent actual level published at
    the vintage: level = anchor * (1 + growth nowcast).
    """
    fit_years = _fit_years_of(model)
    span = panel_span(target_year, target_year, model.hyper.n_timesteps)
    panel = build_panel(
        pool, model.variable_ids, fit_years, span, options,
        standardization=model.standardization,
    )
    points = []
    for vintage in trace_schedule(target_year):
        snapshot = snapshot_at(pool, vintage)
        matrix = design_matrix_for_year(
            panel, target_year, model.hyper.n_timesteps, snapshot)
        growth = predict(model, matrix)
        available = snapshot.series(target_id)
        if not available.observations:
            raise InsufficientHistory(
                f"no published level of {target_id!r} at vintage {vintage}")
        anchor = available.observations[-1].value
        points.append(TracePoint(vintage=vintage, growth=growth,
                                 level=anchor * (1.0 + growth)))
    return NowcastTrace(target_year=target_year, points=tuple(points))


def _fit_years_of(model: TrainedModel) -> YearRange:
    spans = {p.fitted_on for p in model.standardization.values()}
    if len(spans) == 1:
        return spans.pop()
    if not spans:
        raise ValueError("model carries no standardization params")
    return YearRange(min(s.start for s in spans), max(s.end for s in spans))
