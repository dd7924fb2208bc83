"""Regularly spaced power/weather series, cleaning and temporal resampling."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from datetime import timedelta

import numpy as np
import pandas as pd

from .errors import (
    MissingThresholdExceeded,
    NonIntegerFactor,
    PartialBlock,
    UnsupportedResolution,
)

WEATHER_COLUMNS = (
    "wind_speed",
    "temperature",
    "dew_point",
    "cloud_cover",
    "uv_index",
    "humidity",
    "pressure",
)


@dataclass(frozen=True, order=True)
class Resolution:
    step: timedelta

    def __post_init__(self):
        if not isinstance(self.step, timedelta):
            object.__setattr__(self, "step", pd.Timedelta(self.step).to_pytimedelta())
        if self.step <= timedelta(0):
            raise ValueError("resolution step must be positive")

    @classmethod
    def parse(cls, text: str) -> "Resolution":
        return cls(pd.Timedelta(text).to_pytimedelta())

    @property
    def label(self) -> str:
        return duration_label(self.step)

    def steps_per(self, span: timedelta) -> int:
        """Number of steps in `span`; raises NonIntegerFactor if inexact."""
        q, r = divmod(span, self.step)
        if r or q < 1:
            raise NonIntegerFactor(f"{duration_label(span)} is not a whole number of {self.label} steps")
        return int(q)

    def __str__(self):
        return self.label


MINUTE = Resolution(timedelta(minutes=1))
FIVE_MINUTES = Resolution(timedelta(minutes=5))
HOUR = Resolution(timedelta(hours=1))
DAY = Resolution(timedelta(days=1))

_SEASONAL_PERIODS = {MINUTE: 1440, FIVE_MINUTES: 288, HOUR: 24, DAY: 1}


def duration_label(span: timedelta) -> str:
    secs = int(span.total_seconds())
    for unit, size in (("d", 86400), ("h", 3600), ("min", 60), ("s", 1)):
        if secs % size == 0:
            return f"{secs // size}{unit}"
    return f"{span.total_seconds()}s"


def conversion_factor(coarse: Resolution, fine: Resolution) -> int:
    q, r = divmod(coarse.step, fine.step)
    if r or q < 1:
        raise NonIntegerFactor(f"{coarse} is not an integer multiple of {fine}")
    return int(q)


def seasonal_period(res: Resolution) -> int:
    try:
        return _SEASONAL_PERIODS[res]
    except KeyError:
        raise UnsupportedResolution(f"no seasonal period defined for {res}") from None


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Equally spaced observations; missing points are NaN and flagged."""

    start: pd.Timestamp
    resolution: Resolution
    values: np.ndarray
    missing: np.ndarray = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "start", _utc(self.start))
        values = _readonly(self.values)
        if values.ndim != 1:
            raise ValueError("TimeSeries values must be one-dimensional")
        missing = np.isnan(values) if self.missing is None else np.asarray(self.missing, bool) | np.isnan(values)
        missing = missing.copy()
        missing.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "missing", missing)

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.start == other.start
            and self.resolution == other.resolution
            and np.array_equal(self.values, other.values, equal_nan=True)
            and np.array_equal(self.missing, other.missing)
        )

    @property
    def end(self) -> pd.Timestamp:
        """Timestamp one step past the last observation."""
        return self.start + len(self) * self.resolution.step

    @property
    def index(self) -> pd.DatetimeIndex:
        return pd.date_range(self.start, periods=len(self), freq=self.resolution.step)

    def position(self, when) -> int:
        """Index of timestamp `when` (which must fall on the grid)."""
        q, r = divmod(_utc(when) - self.start, self.resolution.step)
        if r:
            raise ValueError(f"{when} is off the {self.resolution} grid")
        return int(q)

    def slice(self, lo: int, hi: int) -> "TimeSeries":
        return TimeSeries(
            self.start + lo * self.resolution.step, self.resolution, self.values[lo:hi], self.missing[lo:hi]
        )


@dataclass(frozen=True, eq=False)
class WeatherFrame:
    """Seven weather columns sharing one grid; values has shape (N, 7)."""

    start: pd.Timestamp
    resolution: Resolution
    values: np.ndarray
    columns: tuple = WEATHER_COLUMNS

    def __post_init__(self):
        object.__setattr__(self, "start", _utc(self.start))
        values = _readonly(self.values)
        if values.ndim != 2 or values.shape[1] != len(WEATHER_COLUMNS):
            raise ValueError(f"weather values must have shape (N, {len(WEATHER_COLUMNS)})")
        if tuple(self.columns) != WEATHER_COLUMNS:
            raise ValueError("weather columns must be exactly " + ",".join(WEATHER_COLUMNS))
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.values)

    @property
    def end(self) -> pd.Timestamp:
        return self.start + len(self) * self.resolution.step

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]

    def slice(self, lo: int, hi: int) -> "WeatherFrame":
        return WeatherFrame(self.start + lo * self.resolution.step, self.resolution, self.values[lo:hi])

    def align_to(self, ts: TimeSeries) -> "WeatherFrame":
        """Cut the frame to exactly the span of `ts` (same resolution required)."""
        if self.resolution != ts.resolution:
            raise NonIntegerFactor(f"weather at {self.resolution} cannot align to {ts.resolution}")
        lo = TimeSeries(self.start, self.resolution, np.zeros(1)).position(ts.start)
        if lo < 0 or lo + len(ts) > len(self):
            raise ValueError("weather does not cover the power series span")
        return self.slice(lo, lo + len(ts))


def _utc(when) -> pd.Timestamp:
    ts = pd.Timestamp(when)
    return ts.tz_localize("UTC") if ts.tzinfo is None else ts.tz_convert("UTC")


def _longest_run(mask: np.ndarray) -> int:
    if not mask.any():
        return 0
    padded = np.concatenate(([0], mask.astype(np.int8), [0]))
    edges = np.flatnonzero(np.diff(padded))
    return int((edges[1::2] - edges[::2]).max())


def clean(
    ts: TimeSeries,
    max_missing_fraction: float = 0.005,
    max_gap: timedelta = timedelta(days=3),
) -> TimeSeries:
    """Interpolate missing points and clamp negative power to zero.

    Interior gaps are filled linearly between the nearest present neighbours;
    leading/trailing gaps take the nearest present value. Raises
    MissingThresholdExceeded when the series has `max_missing_fraction` or
    more missing points, or a missing run longer than `max_gap`.
    """
    n = len(ts)
    missing = ts.missing
    n_missing = int(missing.sum())
    if n_missing:
        if n_missing >= max_missing_fraction * n:
            raise MissingThresholdExceeded(
                f"{n_missing}/{n} points missing (limit {max_missing_fraction:.2%})"
            )
        gap_steps = max_gap // ts.resolution.step
        if _longest_run(missing) > gap_steps:
            raise MissingThresholdExceeded(f"missing run longer than {duration_label(max_gap)}")
    values = np.array(ts.values)
    if n_missing:
        present = np.flatnonzero(~missing)
        values[missing] = np.interp(np.flatnonzero(missing), present, values[present])
    np.maximum(values, 0.0, out=values)
    return TimeSeries(ts.start, ts.resolution, values, np.zeros(n, bool))


def _replace_grid(obj, resolution: Resolution, values: np.ndarray):
    if isinstance(obj, TimeSeries):
        return TimeSeries(obj.start, resolution, values)
    return dataclasses.replace(obj, resolution=resolution, values=values)


def aggregate(ts, target: Resolution):
    """Block-mean `ts` (TimeSeries or WeatherFrame) up to the coarser `target`."""
    f = conversion_factor(target, ts.resolution)
    if f == 1:
        return ts
    n = len(ts)
    if n % f:
        raise PartialBlock(f"length {n} is not divisible by the aggregation factor {f}")
    values = np.asarray(ts.values)
    blocks = values.reshape((n // f, f) + values.shape[1:])
    return _replace_grid(ts, target, blocks.mean(axis=1))


def disaggregate(ts, target: Resolution):
    """Linearly interpolate `ts` onto the finer `target` grid.

    Each value is anchored at its interval start; the last f-1 points repeat
    the final anchor.
    """
    f = conversion_factor(ts.resolution, target)
    if f == 1:
        return ts
    values = np.asarray(ts.values)
    n = len(values)
    fine = np.arange(n * f)
    anchors = np.arange(n) * f
    if values.ndim == 1:
        out = np.interp(fine, anchors, values)
    else:
        out = np.column_stack([np.interp(fine, anchors, values[:, j]) for j in range(values.shape[1])])
    return _replace_grid(ts, target, out)


def resample(ts, target: Resolution):
    """Aggregate or disaggregate, whichever direction `target` requires."""
    if target.step >= ts.resolution.step:
        return aggregate(ts, target)
    return disaggregate(ts, target)
