#!/usr/bin/env python3
"""Generate the bundled synthetic pool used by the acceptance suite.

Ground truth: annual target growth is a linear mix of the calendar-year
mean monthly growth of three informative variables plus small Gaussian
noise; the other 17 monthly variables are independent distractors drawn
from the same marginal process.  Everything is written as level series so
the pipeline's growth/standardize transforms face realistic inputs.

Regenerating with the default seed reproduces data/synthetic_pool.csv
byte for byte.
"""

import argparse
from pathlib import Path

import numpy as np

from nowkit.ingest import write_series_csv
from nowkit.series import (
    Frequency,
    Observation,
    Period,
    PublicationSchedule,
    TimeSeries,
)

FIRST_MONTH_YEAR = 1990
LAST_YEAR = 2019
TARGET_FIRST_LEVEL_YEAR = 1997
TARGET_ID = "target"
N_VARIABLES = 20
INFORMATIVE = {"m04": 0.8, "m11": 0.8, "m17": -0.8}
AR_COEFF = 0.85
AR_INNOVATION_SCALE = 0.02
TARGET_NOISE_SCALE = 0.002
TARGET_LAG_MONTHS = 24
MASTER_SEED = 739


def ar1_growth_path(rng, n_months):
    growths = np.empty(n_months)
    g = 0.0
    for t in range(n_months):
        g = AR_COEFF * g + rng.normal(scale=AR_INNOVATION_SCALE)
        growths[t] = g
    return growths


def monthly_series_from_growths(series_id, growths, lag):
    level = 100.0
    obs = []
    p = Period(FIRST_MONTH_YEAR, 1, Frequency.MONTHLY)
    for g in growths:
        level *= 1.0 + float(g)
        obs.append(Observation(p, level))
        p = p.successor()
    return TimeSeries(series_id, Frequency.MONTHLY, tuple(obs),
                      PublicationSchedule(lag))


def build_pool(seed=MASTER_SEED):
    rng = np.random.default_rng(seed)
    n_months = (LAST_YEAR - FIRST_MONTH_YEAR + 1) * 12
    variable_growths = {}
    pool = []
    for k in range(1, N_VARIABLES + 1):
        name = f"m{k:02d}"
        growths = ar1_growth_path(rng, n_months)
        variable_growths[name] = growths
        pool.append(monthly_series_from_growths(name, growths, lag=1 + (k % 3)))

    target_growths = []
    for year in range(TARGET_FIRST_LEVEL_YEAR + 1, LAST_YEAR + 1):
        start = (year - FIRST_MONTH_YEAR) * 12
        signal = sum(
            beta * float(variable_growths[name][start:start + 12].mean())
            for name, beta in INFORMATIVE.items()
        )
        target_growths.append(signal + rng.normal(scale=TARGET_NOISE_SCALE))

    level = 0.5
    obs = [Observation(Period(TARGET_FIRST_LEVEL_YEAR, 1, Frequency.ANNUAL), level)]
    for i, g in enumerate(target_growths):
        level *= 1.0 + g
        obs.append(Observation(
            Period(TARGET_FIRST_LEVEL_YEAR + 1 + i, 1, Frequency.ANNUAL), level))
    pool.append(TimeSeries(TARGET_ID, Frequency.ANNUAL, tuple(obs),
                           PublicationSchedule(TARGET_LAG_MONTHS)))
    return pool


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path,
                        default=Path(__file__).resolve().parent.parent
                        / "data" / "synthetic_pool.csv")
    parser.add_argument("--seed", type=int, default=MASTER_SEED)
    args = parser.parse_args()
    pool = build_pool(args.seed)
    write_series_csv(pool, args.out)
    n_obs = sum(len(s) for s in pool)
    print(f"wrote {args.out}: {len(pool)} series, {n_obs} observations, "
          f"informative={sorted(INFORMATIVE)}")


if __name__ == "__main__":
    main()
