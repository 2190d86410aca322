"""Shared fixtures: a small synthetic pool with known informative variables."""

from pathlib import Path

import numpy as np
import pytest

from nowkit.series import (
    Frequency,
    Observation,
    Period,
    PublicationSchedule,
    TimeSeries,
)

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


def monthly_growth_path(rng, n_months, phi=0.6, scale=0.012):
    growths = np.empty(n_months)
    g = 0.0
    for t in range(n_months):
        g = phi * g + rng.normal(scale=scale)
        growths[t] = g
    return growths


def levels_from_growths(initial, growths):
    levels = [initial]
    for g in growths:
        levels.append(levels[-1] * (1.0 + g))
    return np.array(levels[1:])


def make_monthly_series(series_id, start_year, growths, lag):
    levels = levels_from_growths(100.0, growths)
    obs = []
    p = Period(start_year, 1, Frequency.MONTHLY)
    for v in levels:
        obs.append(Observation(p, float(v)))
        p = p.successor()
    return TimeSeries(series_id, Frequency.MONTHLY, tuple(obs), PublicationSchedule(lag))


def make_annual_series(series_id, start_year, values, lag):
    obs = [
        Observation(Period(start_year + i, 1, Frequency.ANNUAL), float(v))
        for i, v in enumerate(values)
    ]
    return TimeSeries(series_id, Frequency.ANNUAL, tuple(obs), PublicationSchedule(lag))


def build_synthetic_pool(
    n_distractors=3,
    seed=5,
    first_month_year=1996,
    last_year=2019,
    target_first_level_year=1998,
    betas=(0.8, 0.6),
    noise_scale=0.002,
    target_lag=24,
):
    """Pool whose annual target growth is a linear mix of the calendar-year
    mean monthly growth of the informative variables, plus small noise.

    Returns (pool, informative_ids).
    """
    rng = np.random.default_rng(seed)
    n_months = (last_year - first_month_year + 1) * 12
    pool = {}
    informative = []
    informative_growths = []
    for k in range(len(betas)):
        name = f"inf_{chr(ord('a') + k)}"
        growths = monthly_growth_path(rng, n_months)
        pool[name] = make_monthly_series(name, first_month_year, growths,
                                         lag=int(rng.integers(1, 4)))
        informative.append(name)
        informative_growths.append(growths)
    for k in range(n_distractors):
        name = f"dst_{k:02d}"
        growths = monthly_growth_path(rng, n_months)
        pool[name] = make_monthly_series(name, first_month_year, growths,
                                         lag=int(rng.integers(1, 4)))

    target_growths = []
    for year in range(target_first_level_year + 1, last_year + 1):
        start = (year - first_month_year) * 12
        g = sum(
            beta * float(growths[start:start + 12].mean())
            for beta, growths in zip(betas, informative_growths)
        )
        target_growths.append(g + rng.normal(scale=noise_scale))
    levels = [0.5]
    for g in target_growths:
        levels.append(levels[-1] * (1.0 + g))
    pool["target"] = make_annual_series(
        "target", target_first_level_year, levels, lag=target_lag)
    return pool, tuple(informative)


@pytest.fixture(scope="session")
def small_pool():
    pool, informative = build_synthetic_pool()
    return pool, informative


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR
