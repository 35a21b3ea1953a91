"""Metaheuristic hyperparameter tuning for short-term weather forecasting.

Library layout:
  data            CSV ingestion, cleaning, date splits, scaling, windowing
  metaheuristics  GA, DE, and PSO over bounded mixed search spaces
  arima           ARIMA(p, d, q) fitting and forecasting
  neural          dense/LSTM/GRU forecasters with hand-derived backprop
  evaluation      MSE and MAPE in original units
  synthetic       seeded sinusoid-plus-noise weather generator
  harness         benchmark matrix orchestration and report emission
  cli             command-line interface (prepare / tune / matrix / report / selftest)
"""

from .arima import ArimaOrder, arima_forecast, difference, fit_arima, inverse_difference
from .data import (
    Scaler,
    SplitSpec,
    TimeSeriesTable,
    WindowedDataset,
    clean_missing,
    fit_scaler,
    load_weather_csv,
    make_windows,
    scaler_apply,
    split_by_date,
)
from .evaluation import MetricReport, mape, metric_report, mse
from .harness import ExperimentConfig, RunRecord, emit_reports, prepare, run_matrix
from .metaheuristics import (
    OptimizationResult,
    OptimizerConfig,
    ParamSpec,
    SearchSpace,
    de_optimize,
    decode_candidate,
    ga_optimize,
    pso_optimize,
)
from .neural import ForecastNetwork, NetworkSpec, TrainingConfig, sgd_train
from .synthetic import generate_synthetic_weather

__version__ = "0.1.0"
