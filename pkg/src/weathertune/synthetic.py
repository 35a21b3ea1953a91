"""Seeded temperature-like synthetic weather data for desk-scale runs:
daily plus annual sinusoids with Gaussian noise, and correlated auxiliary
channels matching the real CSV schema."""

from __future__ import annotations

import numpy as np
import pandas as pd

from .data import FEATURE_COLUMNS, TimeSeriesTable


def generate_synthetic_weather(
    days: int = 60,
    seed: int = 0,
    start: str = "2021-01-01",
    missing_temperature_fraction: float = 0.0003,
    missing_precipitation_fraction: float = 0.7,
) -> TimeSeriesTable:
    """Hourly synthetic table with the real dataset's 7 feature columns.

    Temperature = daily sinusoid + annual sinusoid + noise. The precipitation
    column is mostly missing (so the cleaning step drops it, as it does on the
    real data) and temperature has a tiny sprinkle of missing cells.
    """
    rng = np.random.default_rng(seed)
    n = days * 24
    stamps = (np.datetime64(start, "s") + np.arange(n) * np.timedelta64(1, "h"))
    hours = np.arange(n, dtype=np.float64)

    daily = 6.0 * np.sin(2 * np.pi * hours / 24.0)
    annual = 12.0 * np.sin(2 * np.pi * hours / (24.0 * 365.25))
    temp = 8.0 + daily + annual + rng.normal(0, 1.2, n)

    dew = temp - 3.0 + rng.normal(0, 0.8, n)
    hum = np.clip(70.0 - 1.5 * daily + rng.normal(0, 5.0, n), 5.0, 100.0)
    wind = np.clip(12.0 + 3.0 * np.sin(2 * np.pi * hours / 24.0 + 1.3) + rng.normal(0, 3.0, n), 0.0, None)
    vis = np.clip(20.0 + 0.3 * daily + rng.normal(0, 2.0, n), 0.5, 48.0)
    pres = 101.3 + 0.05 * annual + rng.normal(0, 0.15, n)
    precip = np.where(rng.uniform(size=n) < 0.1, rng.exponential(0.5, n), 0.0)

    values = np.column_stack([temp, dew, hum, wind, vis, pres, precip])

    if missing_temperature_fraction > 0:
        k = max(1, int(round(missing_temperature_fraction * n)))
        idx = rng.choice(np.arange(1, n - 1), size=k, replace=False)
        values[idx, 0] = np.nan
    if missing_precipitation_fraction > 0:
        mask = rng.uniform(size=n) < missing_precipitation_fraction
        values[mask, 6] = np.nan

    return TimeSeriesTable(stamps, list(FEATURE_COLUMNS), values)


def write_synthetic_csv(path, days: int = 30, seed: int = 0, start: str = "2021-01-01") -> None:
    """Dump a synthetic table in the documented input CSV format
    (date, time, then the 7 feature columns; empty cell = missing)."""
    table = generate_synthetic_weather(days=days, seed=seed, start=start)
    ts = pd.to_datetime(table.timestamps)
    df = pd.DataFrame(table.values, columns=table.columns)
    df.insert(0, "time", ts.hour)
    df.insert(0, "date", ts.strftime("%Y-%m-%d"))
    df.to_csv(path, index=False)
