"""Command-line entry point.

Subcommands:
  prepare   ingest + clean + split + scale, cache datasets to disk
  tune      single (metaheuristic x model) search
  matrix    full benchmark matrix with reports
  report    re-emit report files from an existing records.jsonl
  selftest  quick invariant checks on synthetic data

Exit codes: 0 success, 1 usage error, 2 data error, 3 run failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import harness
from .errors import DataError, WeathertuneError
from .metaheuristics import OPTIMIZERS, OptimizerConfig


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


class UsageError(Exception):
    pass


def _add_common(p):
    p.add_argument("--config", help="YAML experiment config")
    p.add_argument("--seed", type=int, help="override the master seed")
    p.add_argument("--out", help="override the output directory")
    p.add_argument("--trials", type=int, help="override trial count")
    p.add_argument("--synthetic", action="store_true",
                   help="use the built-in synthetic series instead of a CSV")


def build_parser() -> _Parser:
    parser = _Parser(prog="weathertune",
                     description="Metaheuristic hyperparameter tuning benchmark for weather forecasting models")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("prepare", help="ingest, clean, split, scale, and cache datasets"))

    tune = sub.add_parser("tune", help="run one metaheuristic on one model")
    _add_common(tune)
    tune.add_argument("--model", required=True, choices=["ann", "lstm", "gru", "arima"])
    tune.add_argument("--optimizer", required=True, choices=sorted(OPTIMIZERS))

    _add_common(sub.add_parser("matrix", help="run the full benchmark matrix"))

    rep = sub.add_parser("report", help="re-emit reports from records.jsonl")
    rep.add_argument("--records", required=True)
    rep.add_argument("--out", required=True)

    _add_common(sub.add_parser("selftest", help="run quick invariant checks"))
    return parser


def load_config(args) -> harness.ExperimentConfig:
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise UsageError(f"config file not found: {path}")
        config = harness.ExperimentConfig.from_yaml(path)
    elif getattr(args, "synthetic", False):
        config = harness.ExperimentConfig()
    else:
        raise UsageError("either --config or --synthetic is required")
    if getattr(args, "synthetic", False):
        config.csv_path = None
    if args.seed is not None:
        config.master_seed = args.seed
    if getattr(args, "trials", None) is not None:
        config.trial_count = args.trials
    if getattr(args, "out", None):
        config.output_dir = args.out
    return config


def cmd_prepare(args) -> int:
    config = load_config(args)
    prepared = harness.prepare(config)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in ("train", "validation", "test"):
        prepared.flat[name].save(out / f"{name}_flat.npz")
        prepared.sequential[name].save(out / f"{name}_sequential.npz")
        prepared.tables[name].to_csv(out / f"{name}_scaled.csv")
    with open(out / "scaler.json", "w") as fh:
        json.dump({
            "columns": prepared.scaler.columns,
            "mean": prepared.scaler.mean.tolist(),
            "std": prepared.scaler.std.tolist(),
        }, fh, indent=2)
    print(f"prepared datasets cached under {out}")
    for name in ("train", "validation", "test"):
        print(f"  {name}: {len(prepared.tables[name])} rows, "
              f"{len(prepared.flat[name])} windows")
    return 0


def cmd_tune(args) -> int:
    config = load_config(args)
    prepared = harness.prepare(config)
    record = harness.run_cell(args.optimizer, args.model, 1, prepared, config)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    space = harness.build_search_space(args.model, config)
    payload = {
        "record": json.loads(record.to_json()),
        "search_space": [dataclasses.asdict(s) for s in space.specs],
    }
    path = out / f"tune_{args.optimizer}_{args.model}.json"
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    if record.failed:
        print(f"tune failed: {record.error}", file=sys.stderr)
        return 3
    print(f"{args.optimizer} x {args.model}: best validation MSE "
          f"{record.validation_fitness:.6g} after {record.fitness_evaluations} evaluations")
    print(f"  best hyperparameters: {record.best_params}")
    print(f"  test MSE {record.test_mse:.6g}, test MAPE {record.test_mape:.4g}%")
    print(f"  persisted to {path}")
    return 0


def cmd_matrix(args) -> int:
    config = load_config(args)
    records = harness.run_matrix(config)
    written = harness.emit_reports(records, config.output_dir)
    ok = sum(1 for r in records if not r.failed)
    print(f"matrix complete: {ok}/{len(records)} runs succeeded; "
          f"{len(written)} report files in {config.output_dir}")
    if ok == 0:
        return 3
    return 0


def cmd_report(args) -> int:
    records = harness.load_records(args.records)
    harness.emit_reports(records, args.out)
    print(f"reports re-emitted to {args.out}")
    return 0


def cmd_selftest(args) -> int:
    from . import arima as ar
    from . import data as dt_mod
    from .metaheuristics import ParamSpec, SearchSpace, de_optimize
    from .synthetic import generate_synthetic_weather

    failures = []

    def check(name, ok):
        print(f"  {'ok' if ok else 'FAIL'}  {name}")
        if not ok:
            failures.append(name)

    table = dt_mod.clean_missing(generate_synthetic_weather(days=12, seed=5))
    check("cleaning removes all missing cells", table.missing_count() == 0)

    scaler = dt_mod.fit_scaler(table)
    flat = dt_mod.scaler_apply(scaler, table, "forward")
    back = dt_mod.scaler_apply(scaler, flat, "inverse")
    check("scaler round-trip < 1e-9", np.max(np.abs(back.values - table.values)) < 1e-9)

    ds = dt_mod.make_windows(flat, "temperature", 3, 24)
    check("window count = T - L - H + 1", len(ds) == len(table) - 3 - 24 + 1)

    rng = np.random.default_rng(1)
    x = rng.normal(size=100)
    for d in (1, 2, 3):
        z, seeds = ar.difference(x, d)
        check(f"differencing round-trip d={d}",
              np.max(np.abs(ar.inverse_difference(z, seeds) - x)) < 1e-9)

    space = SearchSpace([ParamSpec(f"x{i}", "continuous", -5, 5) for i in range(3)])
    res = de_optimize(space, lambda p: sum(v * v for v in p.values()),
                      OptimizerConfig(population_size=10, generations=30, seed=3))
    check("DE reduces the sphere objective", res.best_fitness < res.trace[0] * 0.1)

    if failures:
        print(f"selftest: {len(failures)} check(s) failed", file=sys.stderr)
        return 3
    print("selftest: all checks passed")
    return 0


COMMANDS = {
    "prepare": cmd_prepare,
    "tune": cmd_tune,
    "matrix": cmd_matrix,
    "report": cmd_report,
    "selftest": cmd_selftest,
}


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataError, FileNotFoundError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except WeathertuneError as exc:
        print(f"run failure: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
