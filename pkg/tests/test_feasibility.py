"""Rule cascade over indicator records: explanatory rules, overall cascade,
aggregation, and agreement with the survey labels."""

import pytest

from nowkit.errors import NoEligibleRecords, NotTier1, UnknownLabel
from nowkit.feasibility import (
    Availability,
    ClassifierParams,
    FeasibilityLabel,
    IndicatorFlag,
    IndicatorRecord,
    Periodicity,
    aggregate_counts,
    agreement,
    classify_explanatory,
    classify_overall,
)

HL = FeasibilityLabel.HIGHLY_LIKELY
L = FeasibilityLabel.LIKELY
U = FeasibilityLabel.UNLIKELY


def record(**overrides):
    base = dict(
        indicator_code="9.4.1",
        name="Carbon dioxide emissions per unit of GDP",
        unit="Kilogrammes of CO2 per constant 2017 United States dollars",
        tier=1,
        periodicity=Periodicity.ANNUAL,
        observation_count=21,
        lag_months=24,
        availability=Availability.CONSISTENT,
        flags=frozenset(),
        paper_explanatory=HL,
        paper_feasibility=HL,
        notes="",
    )
    base.update(overrides)
    return IndicatorRecord(**base)


class TestLabelOrder:
    def test_total_order(self):
        assert U < L < HL

    def test_parse(self):
        assert FeasibilityLabel.parse("Highly likely") is HL
        assert FeasibilityLabel.parse("likely") is L
        with pytest.raises(UnknownLabel):
            FeasibilityLabel.parse("Maybe")

    def test_text_round_trip(self):
        for label in FeasibilityLabel:
            assert FeasibilityLabel.parse(label.text) is label


class TestClassifyExplanatory:
    def test_structural_constant_unlikely(self):
        # parliament seat counts barely change outside elections
        r = record(
            indicator_code="5.5.1",
            name="Current number of seats in national parliaments",
            flags=frozenset({IndicatorFlag.STRUCTURAL_CONSTANT}),
        )
        label, trace = classify_explanatory(r)
        assert label is U
        assert "explanatory_binary_or_constant" in trace.fired_ids()

    def test_budget_type_likely(self):
        r = record(
            indicator_code="2.a.2",
            name="Total official flows to the agriculture sector",
            flags=frozenset({IndicatorFlag.BUDGET_TYPE}),
        )
        label, _ = classify_explanatory(r)
        assert label is L

    def test_unflagged_highly_likely(self):
        label, trace = classify_explanatory(record())
        assert label is HL
        assert trace.fired_ids() == ["explanatory_default"]

    def test_binary_policy_beats_budget(self):
        r = record(flags=frozenset({IndicatorFlag.BINARY_POLICY, IndicatorFlag.BUDGET_TYPE}))
        label, _ = classify_explanatory(r)
        assert label is U


class TestClassifyOverall:
    def test_insufficient_observations_unlikely(self):
        # three data points: under the ten-point minimum
        r = record(
            indicator_code="8.10.2",
            name="Adults with an account at a bank",
            observation_count=3,
            lag_months=36,
            availability=Availability.IRREGULAR_INTERVAL,
        )
        label, trace = classify_overall(r)
        assert label is U
        assert "min_observations" in trace.fired_ids()

    def test_disaster_event_caps_at_likely(self):
        r = record(
            indicator_code="1.5.1",
            name="Deaths and missing persons attributed to disasters",
            observation_count=16,
            lag_months=12,
            flags=frozenset({IndicatorFlag.DISASTER_EVENT}),
        )
        label, trace = classify_overall(r)
        assert label is L
        assert "disaster_cap" in trace.fired_ids()

    def test_co2_per_gdp_highly_likely(self):
        label, trace = classify_overall(record())
        assert label is HL
        assert trace.fired_ids()[-1] == "combine_min"

    def test_short_lag_unlikely(self):
        r = record(periodicity=Periodicity.MONTHLY,
                   observation_count=300, lag_months=1)
        label, trace = classify_overall(r)
        assert label is U
        assert "publication_lag" in trace.fired_ids()

    def test_no_lag_flag_unlikely(self):
        r = record(flags=frozenset({IndicatorFlag.NO_LAG}), lag_months=None)
        label, _ = classify_overall(r)
        assert label is U

    def test_unknown_lag_skips_lag_rule(self):
        label, _ = classify_overall(record(lag_months=None))
        assert label is HL

    def test_irregular_periodicity_skips_lag_rule(self):
        r = record(periodicity=Periodicity.IRREGULAR, lag_months=1)
        label, _ = classify_overall(r)
        assert label is HL

    def test_sporadic_availability_caps_data_score(self):
        r = record(availability=Availability.SPORADIC)
        label, _ = classify_overall(r)
        assert label is L

    def test_non_tier1_rejected(self):
        with pytest.raises(NotTier1):
            classify_overall(record(tier=2))

    def test_overall_never_above_explanatory(self):
        # min() combination, whenever the data rules pass
        for flags, expl in [
            (frozenset(), HL),
            (frozenset({IndicatorFlag.BUDGET_TYPE}), L),
            (frozenset({IndicatorFlag.BINARY_POLICY}), U),
        ]:
            for availability in Availability:
                r = record(flags=flags, availability=availability)
                overall, _ = classify_overall(r)
                assert overall <= expl

    def test_monotone_in_observation_count(self):
        previous = None
        for n in range(0, 40, 2):
            label, _ = classify_overall(record(observation_count=n))
            if previous is not None:
                assert label >= previous
            previous = label

    def test_deterministic(self):
        r = record(flags=frozenset({IndicatorFlag.DISASTER_EVENT}))
        assert classify_overall(r) == classify_overall(r)

    def test_min_obs_configurable(self):
        r = record(observation_count=12)
        assert classify_overall(r, ClassifierParams(min_obs=15))[0] is U
        assert classify_overall(r, ClassifierParams(min_obs=10))[0] is HL


class TestAggregateCounts:
    def test_empty_input(self):
        counts = aggregate_counts([])
        assert (counts.highly_likely, counts.likely, counts.unlikely) == (0, 0, 0)
        assert counts.total == 0

    def test_partition_sums_to_total(self):
        records = [
            record(paper_feasibility=HL),
            record(paper_feasibility=L),
            record(paper_feasibility=L),
            record(paper_feasibility=U),
        ]
        counts = aggregate_counts(records, "paper")
        assert (counts.highly_likely, counts.likely, counts.unlikely) == (1, 2, 1)
        assert counts.total == len(records)

    def test_derived_source_runs_cascade(self):
        records = [record(observation_count=3), record()]
        counts = aggregate_counts(records, "derived")
        assert counts.unlikely == 1
        assert counts.highly_likely == 1

    def test_bad_source_rejected(self):
        with pytest.raises(ValueError):
            aggregate_counts([], "guessed")


class TestAgreement:
    def test_perfect_agreement(self):
        records = [record(), record(
            observation_count=3, paper_feasibility=U)]
        assert agreement(records) == 1.0

    def test_one_disagreement_in_forty(self):
        records = [record() for _ in range(39)]
        records.append(record(paper_feasibility=U))  # cascade derives HL
        assert agreement(records) == pytest.approx(0.975)

    def test_all_tier2_rejected(self):
        with pytest.raises(NoEligibleRecords):
            agreement([record(tier=2), record(tier=3)])
