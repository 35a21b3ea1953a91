"""Forecast accuracy metrics: MSE and MAPE in original (unscaled) units."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllExcluded, EmptyInput, ShapeMismatch


@dataclass
class MetricReport:
    mse: float
    mape: float
    sample_count: int
    excluded_count: int


def mse(actuals, predictions) -> float:
    """Mean of squared element-wise differences."""
    a = np.asarray(actuals, dtype=np.float64)
    p = np.asarray(predictions, dtype=np.float64)
    if a.shape != p.shape:
        raise ShapeMismatch(f"shapes differ: {a.shape} vs {p.shape}")
    if a.size == 0:
        raise EmptyInput("cannot compute MSE of empty arrays")
    # divergent forecasts overflow to inf, which is the intended score
    with np.errstate(over="ignore"):
        return float(np.mean((a - p) ** 2))


def mape(actuals, predictions, zero_floor: float = 0.1) -> tuple[float, int]:
    """Mean absolute percentage error over points with |actual| >= zero_floor;
    returns (percent, excluded_count). Near-zero actuals are skipped so
    temperatures crossing 0 do not blow up the mean."""
    a = np.asarray(actuals, dtype=np.float64)
    p = np.asarray(predictions, dtype=np.float64)
    if a.shape != p.shape:
        raise ShapeMismatch(f"shapes differ: {a.shape} vs {p.shape}")
    if a.size == 0:
        raise EmptyInput("cannot compute MAPE of empty arrays")
    keep = np.abs(a) >= zero_floor
    excluded = int(a.size - keep.sum())
    if not keep.any():
        raise AllExcluded("every actual value is below the zero floor")
    pct = float(np.mean(100.0 * np.abs(a[keep] - p[keep]) / np.abs(a[keep])))
    return pct, excluded


def metric_report(actuals, predictions, zero_floor: float = 0.1) -> MetricReport:
    pct, excluded = mape(actuals, predictions, zero_floor)
    return MetricReport(
        mse=mse(actuals, predictions),
        mape=pct,
        sample_count=int(np.asarray(actuals).size),
        excluded_count=excluded,
    )
