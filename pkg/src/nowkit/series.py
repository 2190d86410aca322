"""Calendar-aware time-series primitives shared by every other module.

A value is stored only for periods that were actually observed: missing
data is represented by absent periods, never by sentinel values.  Explicit
missing markers appear only inside aligned matrices (see transform).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator


class Frequency(Enum):
    MONTHLY = "M"
    QUARTERLY = "Q"
    ANNUAL = "A"

    @property
    def periods_per_year(self) -> int:
        return {"M": 12, "Q": 4, "A": 1}[self.value]


def month_index(year: int, month: int) -> int:
    """Months since year 0; January of year y is y*12."""
    return year * 12 + (month - 1)


def month_of(index: int) -> int:
    return index % 12 + 1


def year_of(index: int) -> int:
    return index // 12


def format_month(index: int) -> str:
    return f"{year_of(index):04d}-{month_of(index):02d}"


@dataclass(frozen=True, order=False)
class Period:
    """One period of a series: (year, subperiod) within a frequency.

    subperiod is 1-based: months 1..12, quarters 1..4, the single annual
    subperiod is always 1.
    """

    year: int
    subperiod: int
    frequency: Frequency

    def __post_init__(self):
        ppy = self.frequency.periods_per_year
        if not 1 <= self.subperiod <= ppy:
            raise ValueError(
                f"subperiod {self.subperiod} out of range 1..{ppy} "
                f"for {self.frequency.name.lower()} period"
            )

    def sort_key(self) -> tuple[int, int]:
        return (self.year, self.subperiod)

    def __lt__(self, other: "Period") -> bool:
        if self.frequency is not other.frequency:
            raise TypeError("periods of different frequencies are not ordered")
        return self.sort_key() < other.sort_key()

    def __le__(self, other: "Period") -> bool:
        if self.frequency is not other.frequency:
            raise TypeError("periods of different frequencies are not ordered")
        return self.sort_key() <= other.sort_key()

    def successor(self) -> "Period":
        ppy = self.frequency.periods_per_year
        if self.subperiod < ppy:
            return Period(self.year, self.subperiod + 1, self.frequency)
        return Period(self.year + 1, 1, self.frequency)

    def end_month(self) -> int:
        """Index of the last calendar month covered by this period."""
        return period_to_month(self)

    def label(self) -> str:
        if self.frequency is Frequency.MONTHLY:
            return f"{self.year:04d}-{self.subperiod:02d}"
        if self.frequency is Frequency.QUARTERLY:
            return f"{self.year:04d}-Q{self.subperiod}"
        return f"{self.year:04d}"


def period_to_month(p: Period) -> int:
    """Index of the LAST calendar month covered by p.

    Annual periods end in December, quarters in their third month,
    monthly periods are their own month.
    """
    if p.frequency is Frequency.MONTHLY:
        return month_index(p.year, p.subperiod)
    if p.frequency is Frequency.QUARTERLY:
        return month_index(p.year, p.subperiod * 3)
    return month_index(p.year, 12)


@dataclass(frozen=True)
class Observation:
    period: Period
    value: float


@dataclass(frozen=True)
class PublicationSchedule:
    """Months after the end of a period at which its value becomes available."""

    lag_months: int

    def __post_init__(self):
        if self.lag_months < 0:
            raise ValueError("lag_months must be non-negative")

    def publication_month(self, period: Period) -> int:
        return period_to_month(period) + self.lag_months


@dataclass(frozen=True)
class YearRange:
    """Inclusive span of calendar years."""

    start: int
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError(f"empty year range {self.start}..{self.end}")

    def __contains__(self, year: int) -> bool:
        return self.start <= year <= self.end

    def years(self) -> Iterator[int]:
        return iter(range(self.start, self.end + 1))

    def __len__(self) -> int:
        return self.end - self.start + 1


@dataclass(frozen=True)
class TimeSeries:
    """Frequency-stamped observations of one variable with a publication schedule.

    Construction is permissive; use validate_series to obtain the list of
    invariant violations (well-formed ingestion paths validate for you).
    Immutable after construction, safe to share across threads.
    """

    id: str
    frequency: Frequency
    observations: tuple[Observation, ...]
    schedule: PublicationSchedule = field(default=PublicationSchedule(0))

    def __post_init__(self):
        object.__setattr__(self, "observations", tuple(self.observations))

    def __len__(self) -> int:
        return len(self.observations)

    def periods(self) -> list[Period]:
        return [o.period for o in self.observations]

    def values(self) -> list[float]:
        return [o.value for o in self.observations]

    def value_at(self, period: Period) -> float | None:
        for o in self.observations:
            if o.period == period:
                return o.value
        return None

    def last_period(self) -> Period | None:
        return self.observations[-1].period if self.observations else None

    def with_observations(self, observations) -> "TimeSeries":
        return TimeSeries(self.id, self.frequency, tuple(observations), self.schedule)


def observation_count(s: TimeSeries) -> int:
    """Number of stored observations (the quantity the minimum-data rule checks)."""
    return len(s.observations)


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


def validate_series(s: TimeSeries) -> list[Violation]:
    """Return every invariant violation; an empty list means the series is ok."""
    violations: list[Violation] = []
    seen: set[tuple[int, int]] = set()
    prev: Period | None = None
    for obs in s.observations:
        p = obs.period
        if p.frequency is not s.frequency:
            violations.append(Violation(
                "frequency_mismatch",
                f"observation {p.label()} is {p.frequency.name.lower()}, "
                f"series is {s.frequency.name.lower()}",
            ))
            continue
        key = p.sort_key()
        if key in seen:
            violations.append(Violation(
                "duplicate_period", f"period {p.label()} appears more than once"))
        seen.add(key)
        if prev is not None and not key > prev.sort_key():
            violations.append(Violation(
                "not_sorted", f"period {p.label()} is not after {prev.label()}"))
        prev = p
        if not math.isfinite(obs.value):
            violations.append(Violation(
                "non_finite_value", f"value at {p.label()} is {obs.value!r}"))
    return violations
