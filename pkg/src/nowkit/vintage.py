"""Synthetic data vintages: the dataset as it would have appeared at a date.

A vintage removes every observation whose publication date falls after the
vintage month; nothing else changes (no revisions are modelled).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from .series import TimeSeries, Period, month_index, format_month, month_of, year_of


@dataclass(frozen=True, order=True)
class VintageDate:
    year: int
    month: int

    def __post_init__(self):
        if not 1 <= self.month <= 12:
            raise ValueError(f"month {self.month} out of range 1..12")

    @property
    def index(self) -> int:
        return month_index(self.year, self.month)

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}"

    @classmethod
    def parse(cls, text: str) -> "VintageDate":
        m = re.fullmatch(r"(\d{4})-(\d{2})", text)
        if m is None:
            raise ValueError(f"vintage {text!r} is not in YYYY-MM form")
        return cls(int(m.group(1)), int(m.group(2)))

    @classmethod
    def from_index(cls, index: int) -> "VintageDate":
        return cls(year_of(index), month_of(index))


@dataclass(frozen=True)
class DatasetSnapshot:
    """Immutable view of a series pool as of a vintage date.

    cutoffs maps series id to the last period whose publication date is on
    or before the vintage (None when nothing has been published yet).
    """

    vintage: VintageDate
    pool: Mapping[str, TimeSeries]
    cutoffs: Mapping[str, Period | None]

    def series(self, series_id: str) -> TimeSeries:
        """The id'd series restricted to observations published by the vintage."""
        s = self.pool[series_id]
        cutoff = self.cutoffs[series_id]
        if cutoff is None:
            return s.with_observations(())
        kept = tuple(o for o in s.observations if o.period <= cutoff)
        return s.with_observations(kept)

    def is_published(self, series_id: str, period: Period) -> bool:
        s = self.pool[series_id]
        return s.schedule.publication_month(period) <= self.vintage.index


def snapshot_at(pool: Mapping[str, TimeSeries], vintage: VintageDate) -> DatasetSnapshot:
    """Exclude every observation published after the vintage; keep the rest."""
    if not pool:
        raise ValueError("pool is empty")
    cutoffs: dict[str, Period | None] = {}
    for series_id, s in pool.items():
        cutoff: Period | None = None
        for obs in s.observations:
            if s.schedule.publication_month(obs.period) <= vintage.index:
                if cutoff is None or cutoff < obs.period:
                    cutoff = obs.period
        cutoffs[series_id] = cutoff
    return DatasetSnapshot(vintage=vintage, pool=dict(pool), cutoffs=cutoffs)


def latest_vintage(pool: Mapping[str, TimeSeries]) -> VintageDate:
    """Earliest vintage at which every observation in the pool is published."""
    if not pool:
        raise ValueError("pool is empty")
    months = [
        s.schedule.publication_month(o.period)
        for s in pool.values()
        for o in s.observations
    ]
    if not months:
        raise ValueError("pool has no observations")
    return VintageDate.from_index(max(months))


def full_snapshot(pool: Mapping[str, TimeSeries]) -> DatasetSnapshot:
    """Snapshot at which the whole pool is available (the full-data case)."""
    return snapshot_at(pool, latest_vintage(pool))


def trace_schedule(target_year: int) -> list[VintageDate]:
    """Monthly vintages from January of the target year through July of the
    following year: 19 entries, matching the nowcast-over-time trace."""
    dates = [VintageDate(target_year, m) for m in range(1, 13)]
    dates += [VintageDate(target_year + 1, m) for m in range(1, 8)]
    return dates


def checkpoint_schedule(target_year: int) -> list[VintageDate]:
    """Three-point evaluation schedule: the month the target period ends,
    six months after, and ten months after."""
    return [
        VintageDate(target_year, 12),
        VintageDate(target_year + 1, 6),
        VintageDate(target_year + 1, 10),
    ]


def format_vintage(v: VintageDate) -> str:
    return format_month(v.index)
