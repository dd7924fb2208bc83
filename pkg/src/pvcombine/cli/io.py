"""CSV ingestion and serialization for power and weather data."""

from __future__ import annotations

from datetime import timedelta
from pathlib import Path

import numpy as np
import pandas as pd

from ..errors import NonMonotonicTimestamps, SchemaError
from ..series import HOUR, MINUTE, WEATHER_COLUMNS, Resolution, TimeSeries, WeatherFrame, clean

POWER_HEADER = ("timestamp", "power_kw")
WEATHER_HEADER = ("timestamp",) + WEATHER_COLUMNS


def _read(path, header) -> pd.DataFrame:
    try:
        df = pd.read_csv(path, dtype={"timestamp": str}, float_precision="round_trip")
    except pd.errors.EmptyDataError:
        raise SchemaError(f"{path}: file is empty") from None
    missing = [c for c in header if c not in df.columns]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
    extra = [c for c in df.columns if c not in header]
    if extra:
        raise SchemaError(f"{path}: unexpected column(s) {', '.join(extra)}")
    return df


def _grid(path, df: pd.DataFrame, res: Resolution):
    """Parse timestamps and return (start, positions on the regular grid)."""
    if df.empty:
        raise SchemaError(f"{path}: no data rows")
    try:
        stamps = pd.to_datetime(df["timestamp"], utc=True, format="ISO8601")
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"{path}: unparseable timestamp ({exc})") from None
    steps = stamps.diff().iloc[1:]
    if (steps <= pd.Timedelta(0)).any():
        bad = int(np.flatnonzero((steps <= pd.Timedelta(0)).to_numpy())[0]) + 1
        raise NonMonotonicTimestamps(f"{path}: row {bad + 1} is not after the previous row")
    start = stamps.iloc[0]
    offset = (stamps - start).to_numpy()
    step = np.timedelta64(res.step)
    if np.any(offset % step != np.timedelta64(0)):
        raise SchemaError(f"{path}: timestamps are not on a {res.label} grid")
    return start, (offset // step).astype(int)


def _numeric(path, df, columns) -> np.ndarray:
    try:
        return df[list(columns)].astype(float).to_numpy()
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric value ({exc})") from None


def ingest_power(path, max_missing_fraction: float = 0.005, max_gap: timedelta = timedelta(days=3)) -> TimeSeries:
    """Read a 1-minute power CSV, materialize gaps as missing, then clean."""
    df = _read(path, POWER_HEADER)
    start, pos = _grid(path, df, MINUTE)
    values = np.full(pos[-1] + 1, np.nan)
    values[pos] = _numeric(path, df, ["power_kw"])[:, 0]
    return clean(TimeSeries(start, MINUTE, values), max_missing_fraction, max_gap)


def ingest_weather(path) -> WeatherFrame:
    """Read an hourly weather CSV; missing cells are interpolated per column."""
    df = _read(path, WEATHER_HEADER)
    start, pos = _grid(path, df, HOUR)
    raw = _numeric(path, df, WEATHER_COLUMNS)
    values = np.full((pos[-1] + 1, len(WEATHER_COLUMNS)), np.nan)
    values[pos] = raw
    grid = np.arange(len(values))
    for j, name in enumerate(WEATHER_COLUMNS):
        col = values[:, j]
        ok = ~np.isnan(col)
        if not ok.any():
            raise SchemaError(f"{path}: column {name} has no values")
        values[:, j] = np.interp(grid, grid[ok], col[ok])
    return WeatherFrame(start, HOUR, values)


def _stamps(index: pd.DatetimeIndex) -> list:
    return list(index.strftime("%Y-%m-%dT%H:%M:%SZ"))


def write_power_csv(ts: TimeSeries, path) -> None:
    """Full-precision writer; re-ingesting the file reproduces `ts` exactly."""
    df = pd.DataFrame({"timestamp": _stamps(ts.index), "power_kw": np.asarray(ts.values)})
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, lineterminator="\n")


def write_weather_csv(wf: WeatherFrame, path) -> None:
    index = pd.date_range(wf.start, periods=len(wf), freq=wf.resolution.step)
    df = pd.DataFrame(np.asarray(wf.values), columns=list(WEATHER_COLUMNS))
    df.insert(0, "timestamp", _stamps(index))
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, lineterminator="\n")
