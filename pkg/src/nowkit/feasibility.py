"""Deterministic, traceable feasibility classification of indicator records.

The survey's judgment is holistic; this cascade codifies it as explicit
rules so every label comes with the trail of rules that produced it.  The
cascade is validated by an agreement fraction against the survey labels,
not claimed to be equivalent to them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Iterable, Mapping, Sequence

from .errors import NoEligibleRecords, NotTier1, UnknownLabel


class FeasibilityLabel(IntEnum):
    """Three-level scale, totally ordered Unlikely < Likely < HighlyLikely."""

    UNLIKELY = 0
    LIKELY = 1
    HIGHLY_LIKELY = 2

    @property
    def text(self) -> str:
        return {0: "Unlikely", 1: "Likely", 2: "Highly likely"}[self.value]

    @classmethod
    def parse(cls, text: str) -> "FeasibilityLabel":
        mapping = {
            "unlikely": cls.UNLIKELY,
            "likely": cls.LIKELY,
            "highly likely": cls.HIGHLY_LIKELY,
        }
        label = mapping.get(text.strip().lower())
        if label is None:
            raise UnknownLabel(text)
        return label


class Periodicity(Enum):
    MONTHLY = "Monthly"
    QUARTERLY = "Quarterly"
    ANNUAL = "Annual"
    IRREGULAR = "Irregular"


class Availability(Enum):
    CONSISTENT = "Consistent"
    VARIES_BY_REGION = "VariesByRegion"
    SPORADIC = "Sporadic"
    IRREGULAR_INTERVAL = "IrregularInterval"


class IndicatorFlag(Enum):
    BINARY_POLICY = "BinaryPolicy"
    BUDGET_TYPE = "BudgetType"
    ELECTION_BASED = "ElectionBased"
    STRUCTURAL_CONSTANT = "StructuralConstant"
    DISASTER_EVENT = "DisasterEvent"
    NO_LAG = "NoLag"


@dataclass(frozen=True)
class IndicatorRecord:
    """One catalog row: indicator attributes plus the survey's own labels.

    lag_months None means the publication lag is unknown.  Flags are
    assigned by the human transcriber of the row, not inferred from text.
    """

    indicator_code: str
    name: str
    unit: str
    tier: int
    periodicity: Periodicity
    observation_count: int
    lag_months: int | None
    availability: Availability
    flags: frozenset[IndicatorFlag]
    paper_explanatory: FeasibilityLabel
    paper_feasibility: FeasibilityLabel
    notes: str = ""

    def __post_init__(self):
        if self.observation_count < 0:
            raise ValueError("observation_count must be >= 0")
        if self.lag_months is not None and self.lag_months < 0:
            raise ValueError("lag_months must be >= 0 or unknown")


@dataclass(frozen=True)
class RuleStep:
    rule_id: str
    fired: bool
    result: str


@dataclass(frozen=True)
class RuleTrace:
    steps: tuple[RuleStep, ...]

    def fired_ids(self) -> list[str]:
        return [s.rule_id for s in self.steps if s.fired]


@dataclass(frozen=True)
class ClassifierParams:
    """Thresholds of the cascade; the minimum significant lag depends on
    the periodicity and is configuration, not a claim about any survey."""

    min_obs: int = 10
    min_lag_months: Mapping[Periodicity, int] = field(
        default_factory=lambda: {
            Periodicity.MONTHLY: 2,
            Periodicity.QUARTERLY: 3,
            Periodicity.ANNUAL: 6,
        }
    )


def classify_explanatory(record: IndicatorRecord) -> tuple[FeasibilityLabel, RuleTrace]:
    """Explanatory-variable outlook from the record's nature flags.

    Binary policy/legislation outcomes and structural constants have no
    usable explanatory variables; budget- and election-driven indicators
    have only loosely related ones; everything else is well modelled.
    """
    steps = []
    hard = record.flags & {IndicatorFlag.BINARY_POLICY, IndicatorFlag.STRUCTURAL_CONSTANT}
    steps.append(RuleStep(
        "explanatory_binary_or_constant", bool(hard),
        "Unlikely" if hard else "pass",
    ))
    if hard:
        return FeasibilityLabel.UNLIKELY, RuleTrace(tuple(steps))
    soft = record.flags & {IndicatorFlag.BUDGET_TYPE, IndicatorFlag.ELECTION_BASED}
    steps.append(RuleStep(
        "explanatory_budget_or_election", bool(soft),
        "Likely" if soft else "pass",
    ))
    if soft:
        return FeasibilityLabel.LIKELY, RuleTrace(tuple(steps))
    steps.append(RuleStep("explanatory_default", True, "Highly likely"))
    return FeasibilityLabel.HIGHLY_LIKELY, RuleTrace(tuple(steps))


def classify_overall(
    record: IndicatorRecord,
    params: ClassifierParams = ClassifierParams(),
) -> tuple[FeasibilityLabel, RuleTrace]:
    """Full cascade over one Tier 1 record.

    Order: minimum observations, then lag significance, then a data score
    from availability (capped at Likely for disaster-driven indicators),
    combined with the explanatory label by taking the minimum.
    """
    if record.tier != 1:
        raise NotTier1(
            f"indicator {record.indicator_code} is Tier {record.tier}; "
            "only Tier 1 indicators are classified"
        )
    steps: list[RuleStep] = [RuleStep("tier", True, "Tier 1")]

    too_few = record.observation_count < params.min_obs
    steps.append(RuleStep(
        "min_observations", too_few,
        f"Unlikely ({record.observation_count} < {params.min_obs})"
        if too_few else f"pass ({record.observation_count} >= {params.min_obs})",
    ))
    if too_few:
        return FeasibilityLabel.UNLIKELY, RuleTrace(tuple(steps))

    min_lag = params.min_lag_months.get(record.periodicity)
    lag_too_short = (
        IndicatorFlag.NO_LAG in record.flags
        or (record.lag_months is not None
            and min_lag is not None
            and record.lag_months < min_lag)
    )
    steps.append(RuleStep(
        "publication_lag", lag_too_short,
        "Unlikely (no significant lag)" if lag_too_short else "pass",
    ))
    if lag_too_short:
        return FeasibilityLabel.UNLIKELY, RuleTrace(tuple(steps))

    if record.availability is Availability.CONSISTENT:
        data_score = FeasibilityLabel.HIGHLY_LIKELY
    else:
        data_score = FeasibilityLabel.LIKELY
    steps.append(RuleStep(
        "data_availability", True,
        f"{data_score.text} ({record.availability.value})",
    ))
    disaster = IndicatorFlag.DISASTER_EVENT in record.flags
    if disaster and data_score > FeasibilityLabel.LIKELY:
        data_score = FeasibilityLabel.LIKELY
    steps.append(RuleStep(
        "disaster_cap", disaster, "capped at Likely" if disaster else "pass"))

    explanatory, expl_trace = classify_explanatory(record)
    steps.extend(expl_trace.steps)
    overall = min(data_score, explanatory)
    steps.append(RuleStep(
        "combine_min", True,
        f"min({data_score.text}, {explanatory.text}) = {overall.text}",
    ))
    return overall, RuleTrace(tuple(steps))


@dataclass(frozen=True)
class LabelCounts:
    highly_likely: int
    likely: int
    unlikely: int

    @property
    def total(self) -> int:
        return self.highly_likely + self.likely + self.unlikely


def aggregate_counts(
    records: Sequence[IndicatorRecord],
    label_source: str = "paper",
    params: ClassifierParams = ClassifierParams(),
) -> LabelCounts:
    """Exact counts per label; label_source is 'paper' or 'derived'."""
    if label_source not in ("paper", "derived"):
        raise ValueError(f"label_source must be 'paper' or 'derived', got {label_source!r}")
    counts = {label: 0 for label in FeasibilityLabel}
    for record in records:
        if label_source == "paper":
            label = record.paper_feasibility
        else:
            label, _ = classify_overall(record, params)
        counts[label] += 1
    return LabelCounts(
        highly_likely=counts[FeasibilityLabel.HIGHLY_LIKELY],
        likely=counts[FeasibilityLabel.LIKELY],
        unlikely=counts[FeasibilityLabel.UNLIKELY],
    )


def agreement(
    records: Iterable[IndicatorRecord],
    params: ClassifierParams = ClassifierParams(),
) -> float:
    """Share of Tier 1 records whose derived label matches the survey label."""
    eligible = 0
    matches = 0
    for record in records:
        if record.tier != 1:
            continue
        eligible += 1
        derived, _ = classify_overall(record, params)
        if derived == record.paper_feasibility:
            matches += 1
    if eligible == 0:
        raise NoEligibleRecords("no Tier 1 record to compare")
    return matches / eligible
