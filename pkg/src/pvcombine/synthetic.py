"""Synthetic PV cohort with planted structure, for tests and demos.

Power is a clear-sky bell shape attenuated by a persistent cloud process,
plus small measurement noise. The hourly weather file carries the same cloud
process (with noise), so weather-driven models have real signal to find.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pandas as pd

from .series import HOUR, MINUTE, WEATHER_COLUMNS, TimeSeries, WeatherFrame, disaggregate

DEFAULT_START = pd.Timestamp("2020-01-01", tz="UTC")
DEFAULT_HOUSES = {"h01": "site_a", "h02": "site_a", "h03": "site_a", "h04": "site_b", "h05": "site_b"}


def _clear_sky(hours_since_start: np.ndarray, start: pd.Timestamp, lat_shift: float) -> np.ndarray:
    t = start + pd.to_timedelta(hours_since_start, unit="h")
    doy = t.dayofyear.to_numpy()
    hod = t.hour.to_numpy() + t.minute.to_numpy() / 60
    day_len = 11.0 + 2.0 * np.sin(2 * np.pi * (doy - 80) / 365) - lat_shift
    sunrise = 12.0 - day_len / 2
    x = (hod - sunrise) / day_len
    return np.where((x > 0) & (x < 1), np.sin(np.pi * np.clip(x, 0, 1)) ** 1.3, 0.0)


def location_weather(seed: int, days: int, start=DEFAULT_START, lat_shift: float = 0.0) -> WeatherFrame:
    rng = np.random.default_rng(seed)
    n = days * 24
    hrs = np.arange(n, dtype=float)
    z = np.empty(n)
    z[0] = 0.0
    shocks = rng.normal(0, 0.45, n)
    for t in range(1, n):
        z[t] = 0.93 * z[t - 1] + shocks[t]
    cloud = 1 / (1 + np.exp(-(z - 0.3)))
    sky = _clear_sky(hrs, start, lat_shift)
    hod = hrs % 24
    temp = 8 + 6 * np.sin(2 * np.pi * (hod - 9) / 24) - 4 * cloud + rng.normal(0, 0.8, n)
    cols = {
        "wind_speed": np.abs(3 + 2 * z / 3 + rng.normal(0, 1, n)),
        "temperature": temp,
        "dew_point": temp - 5 - 3 * (1 - cloud) + rng.normal(0, 0.7, n),
        "cloud_cover": np.clip(cloud + rng.normal(0, 0.05, n), 0, 1),
        "uv_index": 9 * sky * (1 - 0.7 * cloud) + rng.normal(0, 0.2, n),
        "humidity": np.clip(0.5 + 0.35 * cloud + rng.normal(0, 0.05, n), 0, 1),
        "pressure": 1013 - 8 * np.tanh(z / 2) + rng.normal(0, 1, n),
    }
    return WeatherFrame(start, HOUR, np.column_stack([cols[c] for c in WEATHER_COLUMNS]))


def house_power(seed: int, weather: WeatherFrame, capacity: float = 4.0, lat_shift: float = 0.0) -> TimeSeries:
    rng = np.random.default_rng(seed)
    fine = disaggregate(weather, MINUTE)
    n = len(fine)
    mins = np.arange(n) / 60.0
    sky = _clear_sky(mins, weather.start, lat_shift)
    cloud = fine.column("cloud_cover")
    flicker = np.convolve(rng.normal(0, 1, n + 29), np.ones(30) / 30, mode="valid")
    att = np.clip(1 - 0.75 * cloud + 0.08 * flicker, 0.02, 1.05)
    power = capacity * sky * att + rng.normal(0, 0.01 * capacity, n) * (sky > 0)
    return TimeSeries(weather.start, MINUTE, np.maximum(power, 0.0))


def make_cohort(seed: int = 0, days: int = 121, houses: dict | None = None, start=DEFAULT_START):
    """Return (power by house, weather by location, house -> location)."""
    houses = dict(houses or DEFAULT_HOUSES)
    ss = np.random.SeedSequence(seed)
    locations = sorted(set(houses.values()))
    loc_seeds = dict(zip(locations, ss.spawn(len(locations))))
    shifts = {loc: 0.8 * i for i, loc in enumerate(locations)}
    weather = {
        loc: location_weather(np.random.default_rng(loc_seeds[loc]).integers(2**32), days, start, shifts[loc])
        for loc in locations
    }
    power = {}
    for i, (house, seq) in enumerate(zip(sorted(houses), ss.spawn(len(houses) + len(locations))[len(locations):])):
        loc = houses[house]
        cap = 3.0 + 0.5 * i
        power[house] = house_power(np.random.default_rng(seq).integers(2**32), weather[loc], cap, shifts[loc])
    return power, weather, houses


def write_cohort(directory, seed: int = 0, days: int = 121, houses: dict | None = None) -> Path:
    """Write power/weather CSVs plus a minimal config.json; return the config path."""
    from .cli.io import write_power_csv, write_weather_csv

    root = Path(directory)
    (root / "power").mkdir(parents=True, exist_ok=True)
    (root / "weather").mkdir(parents=True, exist_ok=True)
    power, weather, locmap = make_cohort(seed, days, houses)
    for house, ts in power.items():
        write_power_csv(ts, root / "power" / f"{house}.csv")
    for loc, wf in weather.items():
        write_weather_csv(wf, root / "weather" / f"{loc}.csv")
    config = {
        "power_dir": "power",
        "weather": {loc: f"weather/{loc}.csv" for loc in weather},
        "houses": locmap,
        "output_dir": "out",
    }
    path = root / "config.json"
    path.write_text(json.dumps(config, indent=2) + "\n")
    return path
