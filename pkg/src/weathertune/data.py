"""Hourly weather data pipeline: ingestion, cleaning, date splits,
standardization, and sliding-window supervised datasets."""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import (
    AllColumnsDropped,
    ConstantColumn,
    EmptyFile,
    EmptySplit,
    LeadingGapUnfillable,
    MissingColumn,
    SeriesTooShort,
    ShapeMismatch,
    TimestampDisorder,
    TimestampGap,
)

#: Default feature schema of the hourly weather CSV (besides date/time bookkeeping).
FEATURE_COLUMNS = [
    "temperature",
    "dew_point",
    "relative_humidity",
    "wind_speed",
    "visibility",
    "pressure",
    "precipitation",
]

HOUR = np.timedelta64(1, "h")


@dataclass
class TimeSeriesTable:
    """Timestamped hourly multivariate observations.

    values is an (n_rows, n_columns) float64 matrix; NaN marks a missing cell.
    Timestamps must be strictly increasing.
    """

    timestamps: np.ndarray          # datetime64[s], shape (n,)
    columns: list[str]
    values: np.ndarray              # float64, shape (n, len(columns))

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype="datetime64[s]")
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[1] != len(self.columns):
            raise ShapeMismatch(
                f"values shape {self.values.shape} does not match "
                f"{len(self.columns)} columns"
            )
        if len(self.timestamps) != len(self.values):
            raise ShapeMismatch("timestamps and values row counts differ")
        if len(self.timestamps) > 1 and not np.all(np.diff(self.timestamps) > np.timedelta64(0, "s")):
            raise TimestampDisorder("timestamps are not strictly increasing")

    def __len__(self):
        return len(self.timestamps)

    @property
    def num_features(self) -> int:
        return len(self.columns)

    def missing_count(self) -> int:
        return int(np.isnan(self.values).sum())

    def column(self, name: str) -> np.ndarray:
        try:
            idx = self.columns.index(name)
        except ValueError:
            raise MissingColumn(f"no column named {name!r}") from None
        return self.values[:, idx]

    def take_rows(self, mask: np.ndarray) -> "TimeSeriesTable":
        return TimeSeriesTable(self.timestamps[mask], list(self.columns), self.values[mask])

    def to_csv(self, path) -> None:
        """Debug dump: ISO timestamp column followed by the feature columns."""
        df = pd.DataFrame(self.values, columns=self.columns)
        df.insert(0, "timestamp", pd.to_datetime(self.timestamps))
        df.to_csv(path, index=False)


def load_weather_csv(path, schema=None, allow_gaps: bool = False) -> TimeSeriesTable:
    """Parse the hourly weather CSV into a TimeSeriesTable.

    The file must have a header with ``date`` (ISO-8601), ``time`` (hour 0-23)
    and one column per schema feature. Unparseable numeric cells become NaN.
    Missing hours are an error unless ``allow_gaps`` is set, in which case they
    are inserted as all-NaN rows.
    """
    schema = list(schema) if schema is not None else list(FEATURE_COLUMNS)
    try:
        df = pd.read_csv(path, dtype=str, skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        raise EmptyFile(f"{path}: no data") from None
    if len(df) == 0:
        raise EmptyFile(f"{path}: header only, no rows")

    for col in ["date", "time", *schema]:
        if col not in df.columns:
            raise MissingColumn(f"{path}: column {col!r} absent from header")

    dates = pd.to_datetime(df["date"], format="%Y-%m-%d", errors="raise")
    hours = pd.to_numeric(df["time"], errors="raise").astype(int)
    if hours.min() < 0 or hours.max() > 23:
        raise TimestampDisorder("hour values outside 0-23")
    stamps = (dates + pd.to_timedelta(hours, unit="h")).to_numpy().astype("datetime64[s]")

    diffs = np.diff(stamps)
    if len(stamps) > 1 and not np.all(diffs > np.timedelta64(0, "s")):
        raise TimestampDisorder("rows are not in strictly increasing timestamp order")

    values = np.column_stack(
        [pd.to_numeric(df[c], errors="coerce").to_numpy(dtype=np.float64) for c in schema]
    )

    if len(stamps) > 1 and np.any(diffs != HOUR):
        if not allow_gaps:
            raise TimestampGap("hourly cadence broken; pass allow_gaps=True to fill")
        full = np.arange(stamps[0], stamps[-1] + HOUR, HOUR)
        filled = np.full((len(full), len(schema)), np.nan)
        idx = ((stamps - stamps[0]) / HOUR).astype(int)
        filled[idx] = values
        stamps, values = full, filled

    return TimeSeriesTable(stamps, schema, values)


def clean_missing(
    table: TimeSeriesTable,
    drop_threshold: float = 0.5,
    fill_policy: str = "linear-interpolate",
) -> TimeSeriesTable:
    """Drop columns with too much missing data and fill the remaining gaps.

    A column whose missing fraction is >= drop_threshold is removed entirely.
    Remaining NaNs are filled by ``linear-interpolate`` (edge gaps take the
    nearest observed value) or ``forward-fill``.
    """
    if not 0.0 < drop_threshold <= 1.0:
        raise ValueError("drop_threshold must be in (0, 1]")
    if fill_policy not in ("linear-interpolate", "forward-fill"):
        raise ValueError(f"unknown fill_policy {fill_policy!r}")

    frac = np.isnan(table.values).mean(axis=0)
    keep = frac < drop_threshold
    if not keep.any():
        raise AllColumnsDropped("every column exceeds the missing-data threshold")
    cols = [c for c, k in zip(table.columns, keep) if k]
    vals = table.values[:, keep].copy()

    n = len(table)
    for j in range(vals.shape[1]):
        col = vals[:, j]
        nan = np.isnan(col)
        if not nan.any():
            continue
        if fill_policy == "forward-fill":
            if nan[0]:
                raise LeadingGapUnfillable(f"column {cols[j]!r} starts with a missing value")
            idx = np.where(~nan, np.arange(n), 0)
            np.maximum.accumulate(idx, out=idx)
            vals[:, j] = col[idx]
        else:
            known = np.flatnonzero(~nan)
            vals[nan, j] = np.interp(np.flatnonzero(nan), known, col[known])

    return TimeSeriesTable(table.timestamps, cols, vals)


@dataclass
class SplitSpec:
    """Inclusive train/validation/test date intervals."""

    train: tuple[dt.date, dt.date]
    validation: tuple[dt.date, dt.date]
    test: tuple[dt.date, dt.date]

    def __post_init__(self):
        ranges = [self.train, self.validation, self.test]
        for lo, hi in ranges:
            if lo > hi:
                raise ValueError(f"date range {lo}..{hi} is reversed")
        if not (self.train[1] < self.validation[0] <= self.validation[1] < self.test[0]):
            raise ValueError("ranges must be disjoint and ordered train < validation < test")


def _date_mask(timestamps: np.ndarray, lo: dt.date, hi: dt.date) -> np.ndarray:
    start = np.datetime64(lo, "s")
    end = np.datetime64(hi + dt.timedelta(days=1), "s")
    return (timestamps >= start) & (timestamps < end)


def split_by_date(table: TimeSeriesTable, spec: SplitSpec):
    """Split rows into (train, validation, test) by calendar date; rows
    outside every range are discarded."""
    out = []
    for name, (lo, hi) in [("train", spec.train), ("validation", spec.validation), ("test", spec.test)]:
        mask = _date_mask(table.timestamps, lo, hi)
        if not mask.any():
            raise EmptySplit(f"{name} range {lo}..{hi} captures zero rows")
        out.append(table.take_rows(mask))
    return tuple(out)


@dataclass
class Scaler:
    """Per-feature standardizer with population (divide-by-n) moments,
    fitted on the training split only."""

    mean: np.ndarray
    std: np.ndarray
    columns: list[str] = field(default_factory=list)

    def column_index(self, name: str) -> int:
        return self.columns.index(name)


def fit_scaler(train: TimeSeriesTable) -> Scaler:
    mean = train.values.mean(axis=0)
    std = train.values.std(axis=0)          # population std (ddof=0)
    if np.any(std == 0.0):
        bad = [c for c, s in zip(train.columns, std) if s == 0.0]
        raise ConstantColumn(f"constant columns cannot be standardized: {bad}")
    return Scaler(mean=mean, std=std, columns=list(train.columns))


def scaler_apply(scaler: Scaler, table: TimeSeriesTable, direction: str = "forward") -> TimeSeriesTable:
    """Apply (x-mean)/std per feature, or its inverse."""
    if table.num_features != len(scaler.mean):
        raise ShapeMismatch(
            f"table has {table.num_features} columns, scaler expects {len(scaler.mean)}"
        )
    if direction == "forward":
        vals = (table.values - scaler.mean) / scaler.std
    elif direction == "inverse":
        vals = table.values * scaler.std + scaler.mean
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return TimeSeriesTable(table.timestamps, list(table.columns), vals)


@dataclass
class WindowedDataset:
    """Supervised (input window, target horizon) pairs built with stride 1.

    inputs: (n, lookback, n_features) for sequential layout or
            (n, lookback * n_features) for flat layout.
    targets: (n, horizon) values of the target column.
    """

    inputs: np.ndarray
    targets: np.ndarray
    lookback: int
    horizon: int
    layout: str

    def __post_init__(self):
        if len(self.inputs) != len(self.targets):
            raise ShapeMismatch("inputs and targets sample counts differ")

    def __len__(self):
        return len(self.inputs)

    def save(self, path) -> None:
        """Persist as an .npz archive (arrays plus window geometry)."""
        np.savez(
            path,
            inputs=self.inputs,
            targets=self.targets,
            lookback=self.lookback,
            horizon=self.horizon,
            layout=self.layout,
        )

    @classmethod
    def load(cls, path) -> "WindowedDataset":
        z = np.load(path, allow_pickle=False)
        return cls(
            inputs=z["inputs"],
            targets=z["targets"],
            lookback=int(z["lookback"]),
            horizon=int(z["horizon"]),
            layout=str(z["layout"]),
        )


def make_windows(
    table: TimeSeriesTable,
    target_column: str,
    lookback: int = 3,
    horizon: int = 24,
    layout: str = "sequential",
) -> WindowedDataset:
    """Build dense stride-1 windows: inputs are the lookback rows over all
    features, targets the next ``horizon`` values of ``target_column``."""
    if layout not in ("sequential", "flat"):
        raise ValueError(f"unknown layout {layout!r}")
    n = len(table)
    if n < lookback + horizon:
        raise SeriesTooShort(
            f"need at least lookback+horizon={lookback + horizon} rows, have {n}"
        )
    num = n - lookback - horizon + 1
    win = np.lib.stride_tricks.sliding_window_view(table.values, lookback, axis=0)
    inputs = win[:num].transpose(0, 2, 1).copy()           # (num, lookback, features)
    tgt = table.column(target_column)
    tw = np.lib.stride_tricks.sliding_window_view(tgt, horizon)
    targets = tw[lookback : lookback + num].copy()          # (num, horizon)
    if layout == "flat":
        inputs = inputs.reshape(num, -1)
    return WindowedDataset(inputs, targets, lookback, horizon, layout)
