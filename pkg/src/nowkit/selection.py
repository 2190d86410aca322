"""Two-stage model search: random variable subsets with a small hyperparameter
grid, then an expanded grid over the best three subsets.

Every trial's training seed is derived from the search seed plus the trial's
own (subset, hyperparameters) content, so identical trials reproduce
identical results no matter when or where they run; rankings are therefore
independent of execution order and safe to parallelize.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import AllTrialsFailed, NowkitError
from .evaluation import SplitSpec, score
from .lstm import Hyperparams, predict, train
from .pipeline import (
    TransformOptions,
    VariablePanel,
    build_panel,
    growth_by_year,
    panel_span,
    target_growth,
)
from .seeds import derive_seed
from .series import TimeSeries
from .transform import build_design_matrix
from .vintage import DatasetSnapshot, full_snapshot

DEFAULT_COARSE_GRID = (
    Hyperparams(n_timesteps=12, hidden_size=4, learning_rate=0.02, epochs=150),
    Hyperparams(n_timesteps=12, hidden_size=8, learning_rate=0.02, epochs=150),
    Hyperparams(n_timesteps=12, hidden_size=4, learning_rate=0.005, epochs=300),
    Hyperparams(n_timesteps=12, hidden_size=8, learning_rate=0.005, epochs=300),
)

DEFAULT_FINE_GRID = tuple(
    Hyperparams(n_timesteps=t, hidden_size=h, learning_rate=lr, epochs=e)
    for t in (12, 24)
    for h in (2, 4, 8, 16)
    for lr, e in ((0.02, 150), (0.005, 300))
)


@dataclass(frozen=True)
class SearchConfig:
    candidate_variable_ids: tuple[str, ...]
    n_trials: int = 300
    subset_size_range: tuple[int, int] = (4, 12)
    coarse_grid: tuple[Hyperparams, ...] = DEFAULT_COARSE_GRID
    fine_grid: tuple[Hyperparams, ...] = DEFAULT_FINE_GRID
    top_k: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        lo, hi = self.subset_size_range
        if not 1 <= lo <= hi <= len(self.candidate_variable_ids):
            raise ValueError(
                f"subset_size_range {self.subset_size_range} invalid for "
                f"{len(self.candidate_variable_ids)} candidates"
            )
        if not self.coarse_grid or not self.fine_grid:
            raise ValueError("hyperparameter grids must be non-empty")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")


@dataclass(frozen=True)
class TrialResult:
    trial_id: str
    variables: tuple[str, ...]
    hyper: Hyperparams
    val_mae: float
    val_rmse: float
    status: str = "ok"  # or "failed: <reason>"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def sample_subset(rng: np.random.Generator, config: SearchConfig) -> tuple[str, ...]:
    """Uniform-without-replacement subset; its size is uniform on the range.

    The subset is returned in candidate order so identical subsets compare
    equal regardless of draw order.
    """
    lo, hi = config.subset_size_range
    size = int(rng.integers(lo, hi + 1))
    idx = rng.choice(len(config.candidate_variable_ids), size=size, replace=False)
    return tuple(config.candidate_variable_ids[i] for i in sorted(idx))


def _trial_seed(config_seed: int, subset: Sequence[str], hyper: Hyperparams) -> int:
    return derive_seed(config_seed, "train", ",".join(subset), hyper.grid_key())


@dataclass(frozen=True)
class _TrialContext:
    """Inputs shared by every trial of one search.

    The panel holds every candidate variable transformed once (fit on the
    train span, aligned over the widest window any grid point requests);
    trials only pick out their subset's columns, which is numerically
    identical to transforming per trial.
    """

    panel: VariablePanel
    growths: Mapping[int, float]
    snapshot: DatasetSnapshot
    splits: SplitSpec


def _make_context(
    variable_ids: Sequence[str],
    grids: Sequence[Hyperparams],
    splits: SplitSpec,
    pool: Mapping[str, TimeSeries],
    target_id: str,
    options: TransformOptions,
    skip_unusable: bool = False,
) -> _TrialContext:
    """Shared trial inputs; with skip_unusable, candidates that cannot be
    transformed are left out of the panel so only trials touching them fail."""
    max_steps = max(h.n_timesteps for h in grids)
    span = panel_span(
        splits.train_years.start, splits.validation_years.end, max_steps)
    columns = {}
    standardization = {}
    kept = []
    for var in variable_ids:
        try:
            single = build_panel(pool, (var,), splits.train_years, span, options)
        except (NowkitError, KeyError):
            if skip_unusable:
                continue
            raise
        columns[var] = single.columns[var]
        standardization[var] = single.standardization[var]
        kept.append(var)
    panel = VariablePanel(
        variable_ids=tuple(kept),
        columns=columns,
        standardization=standardization,
        span=span,
    )
    growths = growth_by_year(target_growth(pool, target_id, options))
    return _TrialContext(
        panel=panel,
        growths=growths,
        snapshot=full_snapshot(pool),
        splits=splits,
    )


def _execute_trial(
    ctx: _TrialContext,
    trial_id: str,
    subset: tuple[str, ...],
    hyper: Hyperparams,
) -> TrialResult:
    try:
        columns = [ctx.panel.columns[v] for v in subset]
        standardization = {v: ctx.panel.standardization[v] for v in subset}
        dataset = []
        for year in ctx.splits.train_years.years():
            if year not in ctx.growths:
                raise NowkitError(f"target growth for {year} is unavailable")
            matrix = build_design_matrix(columns, year, hyper.n_timesteps, ctx.snapshot)
            dataset.append((matrix, ctx.growths[year]))
        model = train(dataset, hyper, standardization=standardization)

        preds, actuals = [], []
        for year in ctx.splits.validation_years.years():
            if year not in ctx.growths:
                raise NowkitError(f"target growth for {year} is unavailable")
            matrix = build_design_matrix(columns, year, hyper.n_timesteps, ctx.snapshot)
            preds.append(predict(model, matrix))
            actuals.append(ctx.growths[year])
        metrics = score(preds, actuals)
        return TrialResult(
            trial_id=trial_id,
            variables=subset,
            hyper=hyper,
            val_mae=metrics.mae,
            val_rmse=metrics.rmse,
            status="ok",
        )
    except (NowkitError, KeyError) as exc:
        return TrialResult(
            trial_id=trial_id,
            variables=subset,
            hyper=hyper,
            val_mae=float("inf"),
            val_rmse=float("inf"),
            status=f"failed: {exc}",
        )


def run_trial(
    trial_id: str,
    subset: Sequence[str],
    hyper: Hyperparams,
    splits: SplitSpec,
    pool: Mapping[str, TimeSeries],
    target_id: str,
    options: TransformOptions = TransformOptions(),
) -> TrialResult:
    """Train on the train span, score MAE/RMSE on the validation span.

    Validation matrices use full data; vintage-degraded evaluation is the
    backtest's job.  Any toolkit error marks the trial failed instead of
    aborting the search.
    """
    if not subset:
        raise ValueError("subset is empty")
    try:
        ctx = _make_context(tuple(subset), (hyper,), splits, pool, target_id, options)
    except (NowkitError, KeyError) as exc:
        return TrialResult(
            trial_id=trial_id,
            variables=tuple(subset),
            hyper=hyper,
            val_mae=float("inf"),
            val_rmse=float("inf"),
            status=f"failed: {exc}",
        )
    return _execute_trial(ctx, trial_id, tuple(subset), hyper)


def _rank(trials: Sequence[TrialResult]) -> list[TrialResult]:
    ok = [t for t in trials if t.ok]
    return sorted(ok, key=lambda t: (t.val_mae, t.val_rmse, t.trial_id))


def _thread_count() -> int:
    raw = os.environ.get("NOWKIT_THREADS", "0")
    try:
        return max(0, int(raw))
    except ValueError:
        return 0


def _run_jobs(ctx: _TrialContext, jobs) -> list[TrialResult]:
    def execute(job):
        trial_id, subset, hyper = job
        return _execute_trial(ctx, trial_id, subset, hyper)

    threads = _thread_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            results = list(executor.map(execute, jobs))
    else:
        results = [execute(job) for job in jobs]
    return sorted(results, key=lambda t: t.trial_id)


@dataclass(frozen=True)
class SearchReport:
    ranked: tuple[TrialResult, ...]
    failed: tuple[TrialResult, ...]

    def all_trials(self) -> list[TrialResult]:
        return sorted(self.ranked + self.failed, key=lambda t: t.trial_id)


def random_search(
    config: SearchConfig,
    splits: SplitSpec,
    pool: Mapping[str, TimeSeries],
    target_id: str,
    options: TransformOptions = TransformOptions(),
) -> SearchReport:
    """n_trials random subsets, each run over the coarse grid.

    Successful trials are ranked ascending by validation MAE (ties broken
    by RMSE, then trial id); failed trials are recorded alongside.
    """
    jobs = []
    for i in range(config.n_trials):
        rng = np.random.default_rng(derive_seed(config.seed, "subset", i))
        subset = sample_subset(rng, config)
        for j, grid_point in enumerate(config.coarse_grid):
            hyper = replace(
                grid_point, seed=_trial_seed(config.seed, subset, grid_point))
            jobs.append((f"c{i:04d}.g{j}", subset, hyper))

    ctx = _make_context(
        config.candidate_variable_ids, config.coarse_grid, splits, pool,
        target_id, options, skip_unusable=True)
    results = _run_jobs(ctx, jobs)
    ranked = _rank(results)
    if not ranked:
        raise AllTrialsFailed(f"all {len(results)} coarse trials failed")
    failed = tuple(t for t in results if not t.ok)
    return SearchReport(ranked=tuple(ranked), failed=failed)


def refine_top_k(
    ranked: Sequence[TrialResult],
    config: SearchConfig,
    splits: SplitSpec,
    pool: Mapping[str, TimeSeries],
    target_id: str,
    options: TransformOptions = TransformOptions(),
) -> tuple[TrialResult, list[TrialResult]]:
    """Re-run the top-k subsets over the fine grid; return (winner, trials).

    Duplicate subsets among the top k are refined once.  The winner is the
    refined trial with the lowest validation MAE (same tie-breaks).
    """
    subsets: list[tuple[str, ...]] = []
    for trial in ranked[:config.top_k]:
        if trial.variables not in subsets:
            subsets.append(trial.variables)
    jobs = []
    for s, subset in enumerate(subsets):
        for j, grid_point in enumerate(config.fine_grid):
            hyper = replace(
                grid_point, seed=_trial_seed(config.seed, subset, grid_point))
            jobs.append((f"f{s}.g{j:02d}", subset, hyper))

    ctx = _make_context(
        sorted({v for subset in subsets for v in subset}),
        config.fine_grid, splits, pool, target_id, options, skip_unusable=True)
    results = _run_jobs(ctx, jobs)
    refined = _rank(results)
    if not refined:
        raise AllTrialsFailed("all refinement trials failed")
    return refined[0], results
