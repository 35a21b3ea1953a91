"""Experiment orchestration: wires the data pipeline into model-training
fitness functions, runs the (metaheuristic x model) benchmark matrix over
seeded trials, and emits result tables and plot data."""

from __future__ import annotations

import csv
import dataclasses
import datetime as dt
import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import arima as ar
from . import data as dt_mod
from . import evaluation as ev
from . import neural as nn
from .errors import DataError
from .metaheuristics import (
    OPTIMIZERS,
    OptimizerConfig,
    ParamSpec,
    SearchSpace,
)
from .synthetic import generate_synthetic_weather

WORKERS_ENV = "WEATHERTUNE_WORKERS"


@dataclass
class ExperimentConfig:
    """Everything a benchmark run needs; loadable from a nested YAML file."""

    # data source
    csv_path: str | None = None
    schema: list = field(default_factory=lambda: list(dt_mod.FEATURE_COLUMNS))
    synthetic_days: int = 60
    synthetic_seed: int = 99
    drop_threshold: float = 0.5
    fill_policy: str = "linear-interpolate"
    lookback: int = 3
    horizon: int = 24
    target_column: str = "temperature"
    # splits: explicit ISO date ranges, or day fractions of the table span
    split_dates: dict | None = None
    split_fractions: tuple = (0.7, 0.15, 0.15)
    # matrix
    models: tuple = ("ann", "lstm", "gru", "arima")
    optimizers: tuple = ("ga", "de", "pso", "manual")
    trial_count: int = 3
    master_seed: int = 0
    output_dir: str = "runs"
    workers: int = 1
    # search space
    learning_rate_bounds: tuple = (1e-4, 0.75)
    batch_size_bounds: tuple = (16, 128)
    epochs_bounds: tuple = (3, 15)
    arima_p_bounds: tuple = (0, 5)
    arima_d_bounds: tuple = (0, 3)
    arima_q_bounds: tuple = (0, 5)
    # optimizer settings (desk-scale defaults; raise for full-scale runs)
    population_size: int = 6
    generations: int = 5
    optimizer_constants: dict = field(default_factory=dict)
    # manual baseline (this artifact's convention; the source tables do not state one)
    manual_learning_rate: float = 1e-3
    manual_batch_size: int = 32
    manual_epochs: int = 50
    manual_arima_order: tuple = (1, 1, 1)
    # network widths
    ann_hidden: tuple = (64, 36)
    proj_width: int = 36
    cell_width: int = 64

    _SECTIONS = {
        "data": [
            "csv_path", "schema", "synthetic_days", "synthetic_seed",
            "drop_threshold", "fill_policy", "lookback", "horizon", "target_column",
        ],
        "split": ["split_dates", "split_fractions"],
        "search": [
            "learning_rate_bounds", "batch_size_bounds", "epochs_bounds",
            "arima_p_bounds", "arima_d_bounds", "arima_q_bounds",
        ],
        "optimizer": ["population_size", "generations", "optimizer_constants"],
        "manual": [
            "manual_learning_rate", "manual_batch_size", "manual_epochs",
            "manual_arima_order",
        ],
        "network": ["ann_hidden", "proj_width", "cell_width"],
    }

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        flat = {}
        fields = {f.name for f in dataclasses.fields(cls)}
        for key, value in raw.items():
            if key in cls._SECTIONS:
                if not isinstance(value, dict):
                    raise DataError(f"config section {key!r} must be a mapping")
                for sub, v in value.items():
                    name = sub if sub in fields else None
                    if name is None:
                        raise DataError(f"unknown config key {key}.{sub}")
                    flat[name] = v
            elif key in fields:
                flat[key] = value
            else:
                raise DataError(f"unknown config key {key!r}")
        for name in ("models", "optimizers", "split_fractions", "manual_arima_order",
                     "ann_hidden", "learning_rate_bounds", "batch_size_bounds",
                     "epochs_bounds", "arima_p_bounds", "arima_d_bounds", "arima_q_bounds"):
            if name in flat and isinstance(flat[name], list):
                flat[name] = tuple(flat[name])
        return cls(**flat)

    @classmethod
    def from_yaml(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            raw = yaml.safe_load(fh) or {}
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        out = {}
        placed = set()
        for section, names in self._SECTIONS.items():
            out[section] = {n: _plain(getattr(self, n)) for n in names}
            placed.update(names)
        for f in dataclasses.fields(self):
            if f.name not in placed:
                out[f.name] = _plain(getattr(self, f.name))
        return out

    def to_yaml(self, path) -> None:
        with open(path, "w") as fh:
            yaml.safe_dump(self.to_dict(), fh, sort_keys=False)

    def hash(self) -> str:
        # identifies the experiment, not where its outputs land
        plain = self.to_dict()
        plain.pop("output_dir", None)
        plain.pop("workers", None)
        blob = json.dumps(plain, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _plain(v):
    if isinstance(v, tuple):
        return [_plain(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, list):
        return [_plain(x) for x in v]
    return v


@dataclass
class PreparedData:
    """Cleaned, split, standardized data in every layout the models need."""

    scaler: dt_mod.Scaler
    target_index: int
    num_features: int
    lookback: int
    horizon: int
    tables: dict          # split name -> scaled TimeSeriesTable
    flat: dict            # split name -> WindowedDataset (flat layout)
    sequential: dict      # split name -> WindowedDataset (sequential layout)
    temperature: dict     # split name -> scaled target series (1-D)


def _auto_split_dates(table: dt_mod.TimeSeriesTable, fractions) -> dt_mod.SplitSpec:
    """Partition the table's calendar span into whole-day train/val/test
    blocks proportional to the given fractions."""
    days = np.unique(table.timestamps.astype("datetime64[D]"))
    n = len(days)
    n_train = max(1, int(round(fractions[0] * n)))
    n_val = max(1, int(round(fractions[1] * n)))
    if n_train + n_val >= n:
        raise DataError("not enough days to split with the given fractions")

    def rng(a, b):
        return (days[a].astype(dt.date), days[b].astype(dt.date))

    return dt_mod.SplitSpec(
        train=rng(0, n_train - 1),
        validation=rng(n_train, n_train + n_val - 1),
        test=rng(n_train + n_val, n - 1),
    )


def load_table(config: ExperimentConfig) -> dt_mod.TimeSeriesTable:
    if config.csv_path:
        return dt_mod.load_weather_csv(config.csv_path, schema=config.schema)
    return generate_synthetic_weather(days=config.synthetic_days, seed=config.synthetic_seed)


def prepare(config: ExperimentConfig) -> PreparedData:
    """Full preprocessing pipeline: ingest, clean, split by date, standardize
    on the training split, and window both layouts."""
    table = load_table(config)
    table = dt_mod.clean_missing(table, config.drop_threshold, config.fill_policy)

    if config.split_dates:
        spec = dt_mod.SplitSpec(
            train=_parse_range(config.split_dates["train"]),
            validation=_parse_range(config.split_dates["validation"]),
            test=_parse_range(config.split_dates["test"]),
        )
    else:
        spec = _auto_split_dates(table, config.split_fractions)
    train, val, test = dt_mod.split_by_date(table, spec)

    scaler = dt_mod.fit_scaler(train)
    splits = {"train": train, "validation": val, "test": test}
    scaled = {k: dt_mod.scaler_apply(scaler, v, "forward") for k, v in splits.items()}

    flat, seq, temp = {}, {}, {}
    for name, tbl in scaled.items():
        flat[name] = dt_mod.make_windows(tbl, config.target_column, config.lookback, config.horizon, "flat")
        seq[name] = dt_mod.make_windows(tbl, config.target_column, config.lookback, config.horizon, "sequential")
        temp[name] = tbl.column(config.target_column).copy()

    return PreparedData(
        scaler=scaler,
        target_index=scaler.column_index(config.target_column),
        num_features=train.num_features,
        lookback=config.lookback,
        horizon=config.horizon,
        tables=scaled,
        flat=flat,
        sequential=seq,
        temperature=temp,
    )


def _parse_range(pair):
    lo, hi = pair
    to_date = lambda v: v if isinstance(v, dt.date) else dt.date.fromisoformat(str(v))
    return (to_date(lo), to_date(hi))


# --- search spaces ------------------------------------------------------------


def build_search_space(model_kind: str, config: ExperimentConfig) -> SearchSpace:
    if model_kind == "arima":
        return SearchSpace([
            ParamSpec("p", "integer", *config.arima_p_bounds),
            ParamSpec("d", "integer", *config.arima_d_bounds),
            ParamSpec("q", "integer", *config.arima_q_bounds),
        ])
    return SearchSpace([
        ParamSpec("learning_rate", "continuous-log", *config.learning_rate_bounds),
        ParamSpec("batch_size", "integer", *config.batch_size_bounds),
        ParamSpec("epochs", "integer", *config.epochs_bounds),
    ])


def network_spec(model_kind: str, prepared: PreparedData, config: ExperimentConfig) -> nn.NetworkSpec:
    return nn.NetworkSpec(
        kind=model_kind,
        num_features=prepared.num_features,
        lookback=prepared.lookback,
        horizon=prepared.horizon,
        ann_hidden=tuple(config.ann_hidden),
        proj_width=config.proj_width,
        cell_width=config.cell_width,
    )


# --- fitness ------------------------------------------------------------------


def _windowed_actuals(series: np.ndarray, start: int, horizon: int) -> np.ndarray:
    w = np.lib.stride_tricks.sliding_window_view(series, horizon)
    return w[start:]


def _arima_validation_mse(params: dict, prepared: PreparedData, config: ExperimentConfig) -> float:
    order = ar.ArimaOrder(int(params["p"]), int(params["d"]), int(params["q"]))
    train = prepared.temperature["train"]
    val = prepared.temperature["validation"]
    model = ar.fit_arima(train, order)
    combined = np.concatenate([train, val])
    start = len(train)
    preds = ar.rolling_forecast(model, combined, start, prepared.horizon)
    actuals = _windowed_actuals(combined, start, prepared.horizon)
    return ev.mse(actuals, preds)


def _neural_validation_mse(
    model_kind: str, params: dict, prepared: PreparedData, config: ExperimentConfig, seed: int
) -> float:
    layout = prepared.flat if model_kind == "ann" else prepared.sequential
    spec = network_spec(model_kind, prepared, config)
    model = nn.ForecastNetwork(spec, seed=seed)
    tcfg = nn.TrainingConfig(
        learning_rate=float(params["learning_rate"]),
        batch_size=int(params["batch_size"]),
        epochs=int(params["epochs"]),
        seed=seed,
    )
    model, _ = nn.sgd_train(model, layout["train"], None, tcfg)
    pred = model.forward(layout["validation"].inputs)
    return ev.mse(layout["validation"].targets, pred)


def build_fitness(model_kind: str, prepared: PreparedData, config: ExperimentConfig, seed: int):
    """Fitness = validation MSE (scaled units) of the candidate's trained
    model; failed or diverged candidates evaluate to +inf."""
    def fitness(params):
        # overflow to inf is the expected outcome for diverging candidates
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                if model_kind == "arima":
                    return _arima_validation_mse(params, prepared, config)
                return _neural_validation_mse(model_kind, params, prepared, config, seed)
        except Exception:
            return float("inf")
    return fitness


# --- test evaluation ----------------------------------------------------------


def _inverse_scale(values: np.ndarray, prepared: PreparedData) -> np.ndarray:
    i = prepared.target_index
    return values * prepared.scaler.std[i] + prepared.scaler.mean[i]


def evaluate_candidate(
    model_kind: str, params: dict, prepared: PreparedData, config: ExperimentConfig, seed: int
):
    """Retrain the candidate from scratch and score it on the test split in
    original units. Returns (report, loss_curve_or_None, forecast_sample)."""
    if model_kind == "arima":
        order = ar.ArimaOrder(int(params["p"]), int(params["d"]), int(params["q"]))
        history = np.concatenate(
            [prepared.temperature["train"], prepared.temperature["validation"]]
        )
        model = ar.fit_arima(history, order)
        combined = np.concatenate([history, prepared.temperature["test"]])
        start = len(history)
        preds = ar.rolling_forecast(model, combined, start, prepared.horizon)
        actuals = _windowed_actuals(combined, start, prepared.horizon)
        curve = None
    else:
        layout = prepared.flat if model_kind == "ann" else prepared.sequential
        spec = network_spec(model_kind, prepared, config)
        model = nn.ForecastNetwork(spec, seed=seed)
        tcfg = nn.TrainingConfig(
            learning_rate=float(params["learning_rate"]),
            batch_size=int(params["batch_size"]),
            epochs=int(params["epochs"]),
            seed=seed,
        )
        model, losses = nn.sgd_train(model, layout["train"], layout["validation"], tcfg)
        preds = model.forward(layout["test"].inputs)
        actuals = layout["test"].targets
        curve = {"train": losses.train, "validation": losses.validation}

    actuals_orig = _inverse_scale(np.asarray(actuals), prepared)
    preds_orig = _inverse_scale(np.asarray(preds), prepared)
    report = ev.metric_report(actuals_orig, preds_orig)
    sample = {
        "actual": [float(v) for v in actuals_orig[0]],
        "predicted": [float(v) for v in preds_orig[0]],
    }
    return report, curve, sample


# --- run records ----------------------------------------------------------------


@dataclass
class RunRecord:
    """One seeded (metaheuristic, model, trial) experiment outcome."""

    optimizer: str
    model: str
    trial: int
    seed: int
    config_hash: str
    best_params: dict | None = None
    validation_fitness: float | None = None
    test_mse: float | None = None
    test_mape: float | None = None
    mape_excluded: int | None = None
    fitness_trace: list = field(default_factory=list)
    fitness_evaluations: int = 0
    duration_seconds: float = 0.0
    loss_curve: dict | None = None
    forecast_sample: dict | None = None
    failed: bool = False
    error: str | None = None

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "RunRecord":
        return cls(**json.loads(line))


def derive_seed(master_seed: int, optimizer: str, model: str, trial: int) -> int:
    """Deterministic per-cell seed from the master seed."""
    tag = f"{optimizer}:{model}:{trial}".encode()
    digest = hashlib.sha256(tag).digest()
    entropy = int.from_bytes(digest[:8], "little")
    return int(np.random.SeedSequence([master_seed, entropy]).generate_state(1)[0])


def manual_params(model_kind: str, config: ExperimentConfig) -> dict:
    if model_kind == "arima":
        p, d, q = config.manual_arima_order
        return {"p": p, "d": d, "q": q}
    return {
        "learning_rate": config.manual_learning_rate,
        "batch_size": config.manual_batch_size,
        "epochs": config.manual_epochs,
    }


def run_cell(
    optimizer_name: str, model_kind: str, trial: int,
    prepared: PreparedData, config: ExperimentConfig,
) -> RunRecord:
    """One matrix cell: search (or fixed manual baseline), retrain the best
    candidate from scratch, and score it on the test split."""
    seed = derive_seed(config.master_seed, optimizer_name, model_kind, trial)
    record = RunRecord(
        optimizer=optimizer_name, model=model_kind, trial=trial,
        seed=seed, config_hash=config.hash(),
    )
    started = time.perf_counter()
    try:
        fitness = build_fitness(model_kind, prepared, config, seed)
        if optimizer_name == "manual":
            params = manual_params(model_kind, config)
            best_fit = fitness(params)
            record.best_params = params
            record.validation_fitness = best_fit
            record.fitness_trace = [best_fit]
            record.fitness_evaluations = 1
        else:
            space = build_search_space(model_kind, config)
            opt_cfg = OptimizerConfig(
                population_size=config.population_size,
                generations=config.generations,
                seed=seed,
                **config.optimizer_constants,
            )
            result = OPTIMIZERS[optimizer_name](space, fitness, opt_cfg)
            record.best_params = result.best_params
            record.validation_fitness = result.best_fitness
            record.fitness_trace = list(result.trace)
            record.fitness_evaluations = result.evaluations

        # fresh seed decouples the reported metrics from search-time training
        retrain_seed = derive_seed(config.master_seed, optimizer_name + "/retrain", model_kind, trial)
        report, curve, sample = evaluate_candidate(
            model_kind, record.best_params, prepared, config, retrain_seed
        )
        record.test_mse = report.mse
        record.test_mape = report.mape
        record.mape_excluded = report.excluded_count
        record.loss_curve = curve
        record.forecast_sample = sample
    except Exception as exc:  # individual run failures are recorded, not fatal
        record.failed = True
        record.error = f"{type(exc).__name__}: {exc}"
    record.duration_seconds = time.perf_counter() - started
    return record


def run_matrix(config: ExperimentConfig, prepared: PreparedData | None = None) -> list[RunRecord]:
    """Run every (optimizer, model, trial) cell; failures are logged in their
    records and do not stop the matrix."""
    prepared = prepared or prepare(config)
    cells = [
        (o, m, t)
        for o in config.optimizers
        for m in config.models
        for t in range(1, config.trial_count + 1)
    ]
    workers = int(os.environ.get(WORKERS_ENV, config.workers))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda c: run_cell(*c, prepared, config), cells))
    else:
        records = [run_cell(o, m, t, prepared, config) for o, m, t in cells]
    return records


# --- reports --------------------------------------------------------------------


def emit_reports(records: list[RunRecord], output_dir) -> list[Path]:
    """Write the result artifacts: records.jsonl, mape_table.csv,
    best_hyperparameters.csv, per-run forecast CSVs, and loss curves for the
    best neural run of each cell."""
    if not records:
        raise ValueError("no records to report")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    path = out / "records.jsonl"
    with open(path, "w") as fh:
        for r in records:
            fh.write(r.to_json() + "\n")
    written.append(path)

    optimizers = list(dict.fromkeys(r.optimizer for r in records))
    models = list(dict.fromkeys(r.model for r in records))

    def cell_records(o, m):
        return [r for r in records if r.optimizer == o and r.model == m]

    path = out / "mape_table.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["optimizer", *models])
        for o in optimizers:
            row = [o]
            for m in models:
                cell = cell_records(o, m)
                if not cell or any(r.failed for r in cell):
                    row.append("failed")
                else:
                    row.append(f"{np.mean([r.test_mape for r in cell]):.6f}")
            w.writerow(row)
    written.append(path)

    path = out / "best_hyperparameters.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["optimizer", "model", "trial", "validation_fitness", "hyperparameters"])
        for o in optimizers:
            for m in models:
                ok = [r for r in cell_records(o, m) if not r.failed]
                if not ok:
                    continue
                best = min(ok, key=lambda r: r.validation_fitness)
                w.writerow([o, m, best.trial, f"{best.validation_fitness:.9g}",
                            json.dumps(best.best_params, sort_keys=True)])
    written.append(path)

    for idx, r in enumerate(records):
        if r.forecast_sample is None:
            continue
        path = out / f"forecast_{idx}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["series", *["h%d" % (h + 1) for h in range(len(r.forecast_sample["actual"]))]])
            w.writerow(["actual", *r.forecast_sample["actual"]])
            w.writerow(["predicted", *r.forecast_sample["predicted"]])
        written.append(path)

    for o in optimizers:
        for m in models:
            ok = [r for r in cell_records(o, m) if not r.failed and r.loss_curve]
            if not ok:
                continue
            best = min(ok, key=lambda r: r.validation_fitness)
            path = out / f"loss_curve_{o}_{m}.csv"
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["epoch", "train_mse", "validation_mse"])
                val = best.loss_curve.get("validation") or []
                for e, t in enumerate(best.loss_curve["train"], start=1):
                    v = val[e - 1] if e - 1 < len(val) else ""
                    w.writerow([e, t, v])
            written.append(path)

    return written


def load_records(path) -> list[RunRecord]:
    with open(path) as fh:
        return [RunRecord.from_json(line) for line in fh if line.strip()]
