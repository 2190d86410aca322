"""Transforms: growth rates, seasonal adjustment, standardization, alignment,
fill, and design-matrix construction."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nowkit.errors import (
    AllMissing,
    EmptyOverlap,
    InsufficientData,
    NonPositiveBase,
    NotApplicable,
    ZeroVariance,
)
from nowkit.series import (
    Frequency,
    Observation,
    Period,
    PublicationSchedule,
    TimeSeries,
    YearRange,
    month_index,
)
from nowkit.transform import (
    MonthSpan,
    align_to_monthly,
    build_design_matrix,
    fill_missing,
    growth_rate,
    reconstruct_level,
    seasonal_adjust,
    standardize_apply,
    standardize_fit,
)
from nowkit.vintage import VintageDate, snapshot_at


def annual_series(values, start_year=2000, lag=0, series_id="s"):
    obs = tuple(
        Observation(Period(start_year + i, 1, Frequency.ANNUAL), float(v))
        for i, v in enumerate(values)
    )
    return TimeSeries(series_id, Frequency.ANNUAL, obs, PublicationSchedule(lag))


def monthly_series(values, start=(2000, 1), lag=0, series_id="m"):
    obs = []
    p = Period(start[0], start[1], Frequency.MONTHLY)
    for v in values:
        obs.append(Observation(p, float(v)))
        p = p.successor()
    return TimeSeries(series_id, Frequency.MONTHLY, tuple(obs), PublicationSchedule(lag))


class TestGrowthRate:
    def test_ten_percent_growth(self):
        g = growth_rate(annual_series([100, 110, 121]))
        assert [o.value for o in g.observations] == pytest.approx([0.10, 0.10])
        assert [o.period.year for o in g.observations] == [2001, 2002]

    def test_constant_series_has_zero_growth(self):
        g = growth_rate(annual_series([5, 5, 5, 5]))
        assert [o.value for o in g.observations] == [0.0, 0.0, 0.0]

    def test_zero_base_rejected(self):
        with pytest.raises(NonPositiveBase):
            growth_rate(annual_series([0, 3]))

    def test_gap_produces_no_output_period(self):
        obs = (
            Observation(Period(2000, 1, Frequency.ANNUAL), 100.0),
            Observation(Period(2001, 1, Frequency.ANNUAL), 110.0),
            Observation(Period(2003, 1, Frequency.ANNUAL), 121.0),
        )
        s = TimeSeries("s", Frequency.ANNUAL, obs, PublicationSchedule(0))
        g = growth_rate(s)
        assert [o.period.year for o in g.observations] == [2001]

    def test_no_consecutive_pair_rejected(self):
        obs = (
            Observation(Period(2000, 1, Frequency.ANNUAL), 100.0),
            Observation(Period(2002, 1, Frequency.ANNUAL), 110.0),
        )
        s = TimeSeries("s", Frequency.ANNUAL, obs, PublicationSchedule(0))
        with pytest.raises(InsufficientData):
            growth_rate(s)


class TestReconstructLevel:
    def test_hand_example(self):
        levels = reconstruct_level(100, [0.10, 0.10])
        assert levels == pytest.approx([100.0, 110.0, 121.0])

    def test_empty_growths_identity(self):
        assert reconstruct_level(3.5, []) == [3.5]

    def test_non_positive_initial_rejected(self):
        with pytest.raises(ValueError):
            reconstruct_level(0.0, [0.1])

    @given(st.lists(st.floats(1.0, 1000.0), min_size=2, max_size=40))
    def test_round_trip_within_1e_10(self, levels):
        s = annual_series(levels)
        growths = [o.value for o in growth_rate(s).observations]
        rebuilt = reconstruct_level(levels[0], growths)
        for original, back in zip(levels, rebuilt):
            assert abs(back - original) / abs(original) < 1e-10


class TestSeasonalAdjust:
    def test_recovers_constant_plus_seasonal(self):
        seasonal = np.array([3, -1, 2, 0, -2, 1, 4, -3, 0, 1, -2, -3], dtype=float)
        seasonal -= seasonal.mean()
        values = [10.0 + seasonal[i % 12] for i in range(48)]
        adjusted = seasonal_adjust(monthly_series(values))
        assert len(adjusted.observations) == 48
        for o in adjusted.observations:
            assert abs(o.value - 10.0) < 1e-9

    def test_constant_series_unchanged(self):
        adjusted = seasonal_adjust(monthly_series([7.0] * 36))
        for o in adjusted.observations:
            assert o.value == pytest.approx(7.0, abs=1e-12)

    def test_quarterly_zero_sum_seasonal_recovered(self):
        seasonal = [1.0, -0.5, 0.25, -0.75]
        values = [20.0 + seasonal[i % 4] for i in range(16)]
        obs = []
        p = Period(2000, 1, Frequency.QUARTERLY)
        for v in values:
            obs.append(Observation(p, v))
            p = p.successor()
        s = TimeSeries("q", Frequency.QUARTERLY, tuple(obs), PublicationSchedule(0))
        adjusted = seasonal_adjust(s)
        for o in adjusted.observations:
            assert abs(o.value - 20.0) < 1e-9

    def test_annual_not_applicable(self):
        with pytest.raises(NotApplicable):
            seasonal_adjust(annual_series([1, 2, 3]))

    def test_under_two_cycles_rejected(self):
        with pytest.raises(InsufficientData):
            seasonal_adjust(monthly_series([1.0] * 23))

    def test_gap_rejected(self):
        values = list(range(48))
        s = monthly_series(values)
        gappy = s.with_observations(s.observations[:20] + s.observations[21:])
        with pytest.raises(InsufficientData):
            seasonal_adjust(gappy)

    def test_pure_trend_preserved_on_interior(self):
        # linear trend, no seasonality: interior points must be untouched
        values = [100.0 + 0.5 * i for i in range(48)]
        adjusted = seasonal_adjust(monthly_series(values))
        for original, o in list(zip(values, adjusted.observations))[6:-6]:
            assert abs(o.value - original) < 1e-9


class TestStandardize:
    def test_fit_hand_example(self):
        params = standardize_fit(annual_series([1, 2, 3]), YearRange(2000, 2002))
        assert params.mean == pytest.approx(2.0)
        assert params.sd == pytest.approx(math.sqrt(2.0 / 3.0))
        assert params.sd == pytest.approx(0.816497, abs=1e-6)

    def test_apply_hand_example(self):
        s = annual_series([1, 2, 3])
        params = standardize_fit(s, YearRange(2000, 2002))
        z = standardize_apply(s, params)
        assert [o.value for o in z.observations] == pytest.approx(
            [-1.224745, 0.0, 1.224745], abs=1e-6)

    def test_apply_outside_fit_range(self):
        s = annual_series([1, 2, 3, 4])
        params = standardize_fit(s, YearRange(2000, 2002))
        z = standardize_apply(s, params)
        assert z.observations[-1].value == pytest.approx(2.449490, abs=1e-6)

    def test_fit_range_excludes_later_observations(self):
        s = annual_series([1, 2, 3, 1000], start_year=2001)
        params = standardize_fit(s, YearRange(2001, 2003))
        assert params.mean == pytest.approx(2.0)

    def test_constant_series_zero_variance(self):
        with pytest.raises(ZeroVariance):
            standardize_fit(annual_series([4, 4, 4]), YearRange(2000, 2002))

    def test_too_few_in_range(self):
        with pytest.raises(InsufficientData):
            standardize_fit(annual_series([1, 2, 3]), YearRange(2002, 2002))

    @given(st.lists(st.floats(-50, 50), min_size=3, max_size=30).filter(
        lambda v: max(v) - min(v) > 1e-6))
    def test_standardized_fit_span_has_mean_zero_sd_one(self, values):
        s = annual_series(values)
        fit = YearRange(2000, 2000 + len(values) - 1)
        z = standardize_apply(s, standardize_fit(s, fit))
        arr = np.array([o.value for o in z.observations])
        assert abs(arr.mean()) < 1e-12
        assert abs(arr.std() - 1.0) < 1e-12


class TestAlignToMonthly:
    def test_quarterly_lands_on_quarter_end(self):
        obs = (Observation(Period(2020, 1, Frequency.QUARTERLY), 5.0),)
        s = TimeSeries("q", Frequency.QUARTERLY, obs, PublicationSchedule(0))
        span = MonthSpan(month_index(2020, 1), month_index(2020, 12))
        col = align_to_monthly(s, span)
        assert col.value_at(month_index(2020, 3)) == 5.0
        assert col.value_at(month_index(2020, 1)) is None
        assert col.value_at(month_index(2020, 2)) is None

    def test_annual_lands_on_december_only(self):
        s = annual_series([9.0], start_year=2020)
        span = MonthSpan(month_index(2020, 1), month_index(2020, 12))
        col = align_to_monthly(s, span)
        present = [m for m in range(span.start, span.end + 1)
                   if col.value_at(m) is not None]
        assert present == [month_index(2020, 12)]

    def test_monthly_is_identity_inside_span(self):
        s = monthly_series(range(12), start=(2020, 1))
        span = MonthSpan(month_index(2020, 1), month_index(2020, 12))
        col = align_to_monthly(s, span)
        assert [col.value_at(m) for m in range(span.start, span.end + 1)] == \
            [float(v) for v in range(12)]

    def test_no_overlap_rejected(self):
        s = monthly_series(range(12), start=(2020, 1))
        span = MonthSpan(month_index(2025, 1), month_index(2025, 12))
        with pytest.raises(EmptyOverlap):
            align_to_monthly(s, span)


class TestFillMissing:
    def test_missing_becomes_zero(self):
        col = align_to_monthly(
            annual_series([1.0], start_year=2020),
            MonthSpan(month_index(2020, 11), month_index(2021, 1)),
        )
        filled = fill_missing(col)
        assert filled.values == (0.0, 1.0, 0.0)

    def test_no_missing_unchanged(self):
        s = monthly_series([1, 2, 3], start=(2020, 1))
        col = align_to_monthly(s, MonthSpan(month_index(2020, 1), month_index(2020, 3)))
        assert fill_missing(col).values == (1.0, 2.0, 3.0)

    def test_all_missing_rejected(self):
        from nowkit.transform import AlignedColumn
        col = AlignedColumn("v", MonthSpan(0, 2), (None, None, None))
        with pytest.raises(AllMissing):
            fill_missing(col)


def make_pool_and_column(lag=1, n_months=36, start=(2014, 1)):
    s = monthly_series(np.arange(1, n_months + 1) * 0.1, start=start, lag=lag)
    span = MonthSpan(month_index(start[0], start[1]),
                     month_index(start[0], start[1]) + n_months - 1)
    return {s.id: s}, align_to_monthly(s, span)


class TestBuildDesignMatrix:
    def test_partial_vintage_masks_unpublished_months(self):
        pool, col = make_pool_and_column(lag=1, n_months=24, start=(2014, 6))
        snap = snapshot_at(pool, VintageDate(2015, 3))
        matrix = build_design_matrix([col], 2015, 12, snap)
        # lag 1: month m published iff m+1 <= 2015-03, i.e. m <= 2015-02
        observed, filled = [], []
        for i, m in enumerate(range(month_index(2015, 1), month_index(2015, 12) + 1)):
            expected = col.value_at(m)
            if m + 1 <= VintageDate(2015, 3).index:
                observed.append(i)
                assert matrix.window[i, 0] == expected
            else:
                filled.append(i)
                assert matrix.window[i, 0] == 0.0
        assert observed == [0, 1]
        assert len(filled) == 10
        assert matrix.n_filled == 10

    def test_late_vintage_has_zero_filled_cells(self):
        # every lag <= 7 months: fully published 7 months after year end
        pool, col = make_pool_and_column(lag=7, n_months=24, start=(2014, 6))
        snap = snapshot_at(pool, VintageDate(2016, 7))
        matrix = build_design_matrix([col], 2015, 12, snap)
        assert matrix.n_filled == 0
        for i, m in enumerate(range(month_index(2015, 1), month_index(2015, 12) + 1)):
            assert matrix.window[i, 0] == col.value_at(m)

    def test_single_timestep_window_is_december(self):
        pool, col = make_pool_and_column(lag=0, n_months=24, start=(2014, 6))
        snap = snapshot_at(pool, VintageDate(2016, 1))
        matrix = build_design_matrix([col], 2015, 1, snap)
        assert matrix.window.shape == (1, 1)
        assert matrix.window[0, 0] == col.value_at(month_index(2015, 12))

    def test_all_unpublished_everywhere_rejected(self):
        pool, col = make_pool_and_column(lag=24, n_months=24, start=(2015, 1))
        snap = snapshot_at(pool, VintageDate(2015, 1))
        with pytest.raises(AllMissing):
            build_design_matrix([col], 2015, 12, snap)

    def test_monotone_in_vintage(self):
        # later vintages only convert filled cells to observed ones
        pool, col = make_pool_and_column(lag=2, n_months=36, start=(2014, 1))
        vintages = [VintageDate(2015, m) for m in range(1, 13)] + \
                   [VintageDate(2016, m) for m in range(1, 13)]
        previous = None
        for v in vintages:
            matrix = build_design_matrix([col], 2015, 12, snapshot_at(pool, v))
            if previous is not None:
                for i in range(12):
                    if previous.window[i, 0] != 0.0:
                        assert matrix.window[i, 0] == previous.window[i, 0]
                assert matrix.n_filled <= previous.n_filled
            previous = matrix

    def test_no_non_finite_cells(self):
        pool, col = make_pool_and_column(lag=3, n_months=36, start=(2014, 1))
        for month in (1, 6, 12):
            matrix = build_design_matrix(
                [col], 2015, 12, snapshot_at(pool, VintageDate(2015, month)))
            assert np.all(np.isfinite(matrix.window))
