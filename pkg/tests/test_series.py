from datetime import timedelta

import numpy as np
import pandas as pd
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pvcombine.errors import (
    MissingThresholdExceeded,
    NonIntegerFactor,
    PartialBlock,
    UnsupportedResolution,
)
from pvcombine.series import (
    DAY,
    FIVE_MINUTES,
    HOUR,
    MINUTE,
    WEATHER_COLUMNS,
    Resolution,
    TimeSeries,
    WeatherFrame,
    aggregate,
    clean,
    conversion_factor,
    disaggregate,
    resample,
    seasonal_period,
)

T0 = pd.Timestamp("2021-03-01", tz="UTC")


def ts(values, res=MINUTE, start=T0):
    return TimeSeries(start, res, np.asarray(values, dtype=float))


def relaxed(series):
    return clean(series, max_missing_fraction=1.0)


class TestResolution:
    def test_parse_and_label(self):
        assert Resolution.parse("5min") == FIVE_MINUTES
        assert HOUR.label == "1h"
        assert DAY.label == "1d"

    def test_non_positive_step_rejected(self):
        with pytest.raises(ValueError):
            Resolution(timedelta(0))

    def test_conversion_factor(self):
        assert conversion_factor(HOUR, MINUTE) == 60
        assert conversion_factor(DAY, FIVE_MINUTES) == 288
        with pytest.raises(NonIntegerFactor):
            conversion_factor(Resolution(timedelta(minutes=7)), FIVE_MINUTES)

    def test_steps_per_requires_whole_steps(self):
        assert HOUR.steps_per(timedelta(days=1)) == 24
        with pytest.raises(NonIntegerFactor):
            HOUR.steps_per(timedelta(minutes=90))


class TestSeasonalPeriod:
    def test_hourly_is_24(self):
        assert seasonal_period(HOUR) == 24

    def test_minutely_is_1440(self):
        assert seasonal_period(MINUTE) == 1440

    def test_five_minute_is_day_over_step(self):
        assert seasonal_period(FIVE_MINUTES) == timedelta(days=1) // timedelta(minutes=5)

    def test_daily_is_1(self):
        assert seasonal_period(DAY) == 1

    def test_unsupported(self):
        with pytest.raises(UnsupportedResolution):
            seasonal_period(Resolution(timedelta(minutes=15)))


class TestTimeSeries:
    def test_nan_flags_missing(self):
        s = ts([1.0, np.nan, 3.0])
        assert s.missing.tolist() == [False, True, False]

    def test_arrays_are_read_only(self):
        s = ts([1.0, 2.0])
        with pytest.raises(ValueError):
            s.values[0] = 5.0

    def test_naive_start_becomes_utc(self):
        s = TimeSeries(pd.Timestamp("2021-01-01"), HOUR, np.zeros(3))
        assert str(s.start.tz) == "UTC"
        assert s.end == pd.Timestamp("2021-01-01 03:00", tz="UTC")

    def test_weather_frame_needs_seven_columns(self):
        with pytest.raises(ValueError):
            WeatherFrame(T0, HOUR, np.zeros((4, 6)))
        wf = WeatherFrame(T0, HOUR, np.arange(28.0).reshape(4, 7))
        assert wf.column("cloud_cover").tolist() == [3.0, 10.0, 17.0, 24.0]
        assert len(WEATHER_COLUMNS) == 7


class TestClean:
    def test_linear_midpoint(self):
        assert relaxed(ts([1.0, np.nan, 3.0])).values.tolist() == [1.0, 2.0, 3.0]

    def test_negative_clamp(self):
        assert clean(ts([-0.2, 1.0])).values.tolist() == [0.0, 1.0]

    def test_boundary_gaps_take_nearest_value(self):
        assert relaxed(ts([np.nan, 2.0, 4.0, np.nan])).values.tolist() == [2.0, 2.0, 4.0, 4.0]

    def test_one_percent_missing_exceeds_threshold(self):
        v = np.ones(1000)
        v[::100] = np.nan  # 10 of 1000 = 1%
        with pytest.raises(MissingThresholdExceeded):
            clean(ts(v))

    def test_just_under_threshold_passes(self):
        v = np.ones(1000)
        v[[10, 500, 900, 950]] = np.nan  # 0.4%
        out = clean(ts(v))
        assert not out.missing.any()

    def test_long_gap_rejected(self):
        v = np.ones(5 * 24)
        v[10:10 + 73] = np.nan
        with pytest.raises(MissingThresholdExceeded):
            clean(ts(v, HOUR), max_missing_fraction=1.0)

    @given(st.lists(st.one_of(st.floats(-5, 5), st.just(np.nan)), min_size=2, max_size=60))
    def test_idempotent(self, raw):
        raw = np.array(raw)
        if np.isnan(raw).all():
            raw[0] = 1.0
        once = relaxed(ts(raw))
        assert not once.missing.any()
        assert (once.values >= 0).all()
        assert relaxed(once) == once


class TestAggregate:
    def test_block_mean(self):
        out = aggregate(ts([1, 2, 3, 4, 5]), FIVE_MINUTES)
        assert out.values.tolist() == [3.0]
        assert out.start == T0

    def test_identity(self):
        s = ts([1, 2, 3])
        assert aggregate(s, MINUTE) == s

    def test_partial_block(self):
        with pytest.raises(PartialBlock):
            aggregate(ts(np.arange(7)), FIVE_MINUTES)

    def test_non_integer_factor(self):
        with pytest.raises(NonIntegerFactor):
            aggregate(ts(np.arange(10), FIVE_MINUTES), Resolution(timedelta(minutes=7)))

    def test_weather_columns_averaged(self):
        wf = WeatherFrame(T0, HOUR, np.arange(48 * 7, dtype=float).reshape(48, 7))
        out = aggregate(wf, DAY)
        np.testing.assert_allclose(out.values, wf.values.reshape(2, 24, 7).mean(axis=1))


class TestDisaggregate:
    def test_constant(self):
        out = disaggregate(ts([5, 5], HOUR), FIVE_MINUTES)
        assert out.values.tolist() == [5.0] * 24

    def test_pointwise_linear_rule(self):
        out = disaggregate(ts([0, 60], HOUR), MINUTE)
        expected = [float(k) for k in range(60)] + [60.0] * 60
        assert out.values.tolist() == expected

    def test_single_element(self):
        assert disaggregate(ts([2.5], HOUR), FIVE_MINUTES).values.tolist() == [2.5] * 12

    def test_resample_picks_direction(self):
        s = ts(np.arange(120.0))
        assert len(resample(s, HOUR)) == 2
        assert len(resample(resample(s, HOUR), MINUTE)) == 120


FACTOR_PAIRS = [(MINUTE, FIVE_MINUTES), (MINUTE, HOUR), (FIVE_MINUTES, HOUR), (HOUR, DAY)]


@given(
    st.sampled_from(FACTOR_PAIRS),
    st.integers(1, 6),
    st.integers(0, 2**31 - 1),
)
def test_energy_conserved(pair, blocks, seed):
    fine, coarse = pair
    f = conversion_factor(coarse, fine)
    x = np.random.default_rng(seed).gamma(2.0, 1.5, blocks * f)
    out = aggregate(ts(x, fine), coarse)
    assert out.values.sum() * f == pytest.approx(x.sum(), rel=1e-9)


@given(st.sampled_from(FACTOR_PAIRS), st.integers(1, 5))
def test_roundtrip_length_and_start(pair, blocks):
    fine, coarse = pair
    f = conversion_factor(coarse, fine)
    s = ts(np.arange(blocks * f, dtype=float), fine)
    back = disaggregate(aggregate(s, coarse), fine)
    assert len(back) == len(s)
    assert back.start == s.start
    up = aggregate(disaggregate(ts(np.arange(blocks, dtype=float), coarse), fine), coarse)
    assert len(up) == blocks and up.start == T0
