"""Acceptance suite: one test per shipping criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line (visible with
``pytest tests/test_acceptance.py -s``) and asserts the same condition,
so a plain pytest run stays authoritative.

These are deliberately end-to-end and property-based: exact full-scale
benchmark numbers are not reproducible on a desktop, so we check gradient
correctness, operator arithmetic, optimizer efficacy on a known oracle,
estimator recovery on synthetic processes, pipeline invariants, desk-scale
ordering against the manual baseline, determinism, and the CLI smoke path.
"""

import itertools
import json
import time

import numpy as np
import pytest
from scipy import stats

from weathertune import arima as ar
from weathertune import metaheuristics as mh
from weathertune import neural as nn
from weathertune.cli import cli_main
from weathertune.data import fit_scaler, make_windows, scaler_apply, TimeSeriesTable
from weathertune.harness import ExperimentConfig, run_matrix
from weathertune.synthetic import generate_synthetic_weather


def report(number, description, ok):
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {description}")
    assert ok, f"criterion {number} failed: {description}"


SMALL = dict(num_features=4, lookback=3, horizon=5, ann_hidden=(6, 5),
             proj_width=5, cell_width=6)


def _numeric_gradient(model, X, Y, eps=1e-5):
    flat = model.flatten()
    grad = np.empty_like(flat)
    for i in range(len(flat)):
        v = flat.copy()
        v[i] += eps
        model.unflatten(v)
        lp, _ = model.loss_and_gradients(X, Y)
        v[i] -= 2 * eps
        model.unflatten(v)
        lm, _ = model.loss_and_gradients(X, Y)
        grad[i] = (lp - lm) / (2 * eps)
    model.unflatten(flat)
    return grad


def _gradient_error(model, X, Y):
    """Worst per-tensor relative L2 error of backprop vs central differences.

    Per-tensor norms keep the comparison meaningful where individual gradient
    entries are ~1e-6 and the finite-difference estimate itself carries ~1e-11
    absolute roundoff.
    """
    _, grads = model.loss_and_gradients(X, Y)
    analytic = np.concatenate([grads[k].ravel() for k in model._keys])
    numeric = _numeric_gradient(model, X, Y)
    worst = 0.0
    pos = 0
    for k in model._keys:
        size = model.params[k].size
        a = analytic[pos: pos + size]
        m = numeric[pos: pos + size]
        pos += size
        worst = max(worst, np.linalg.norm(a - m) / max(np.linalg.norm(m), 1e-12))
    return worst


def test_criterion_1_gradient_correctness():
    start = time.monotonic()
    worst = 0.0
    for kind in ("ann", "lstm", "gru"):
        spec = nn.NetworkSpec(kind=kind, **SMALL)
        for seed in range(5):
            # data-seed offset chosen so no ReLU pre-activation falls within
            # the finite-difference step of the kink, where the FD estimate
            # itself (not the analytic gradient) goes wrong
            rng = np.random.default_rng(2000 + seed)
            if kind == "ann":
                X = rng.normal(size=(6, spec.input_width))
            else:
                X = rng.normal(size=(6, spec.lookback, spec.num_features))
            Y = rng.normal(size=(6, spec.horizon))
            model = nn.ForecastNetwork(spec, seed=seed)
            worst = max(worst, _gradient_error(model, X, Y))
    elapsed = time.monotonic() - start
    report(1, f"gradient check: worst relative error {worst:.2e} < 1e-5 "
              f"in {elapsed:.1f}s < 30s",
           worst < 1e-5 and elapsed < 30.0)


def test_criterion_2_operator_exactness():
    rng = np.random.default_rng(7)
    space = mh.SearchSpace([mh.ParamSpec(f"x{i}", "continuous", -10, 10)
                            for i in range(4)])

    # donor formula to machine precision on 1000 random triples
    mutate_ok = True
    for _ in range(1000):
        r1, r2, r3 = rng.uniform(-5, 5, size=(3, 4))
        F = rng.uniform(0, 2)
        got = mh.de_mutate(r1, r2, r3, F, space)
        if not np.array_equal(got, np.clip(r1 + F * (r2 - r3), -10, 10)):
            mutate_ok = False
            break

    # crossover closed forms at CR in {0, 1}
    x = rng.uniform(-5, 5, size=4)
    v = rng.uniform(-5, 5, size=4)
    cross_ok = (np.array_equal(mh.de_crossover(x, v, 0.0, False, rng), x)
                and np.array_equal(mh.de_crossover(x, v, 1.0, False, rng), v))

    # zero-coefficient swarm update freezes position and velocity
    x0 = rng.uniform(-5, 5, size=4)
    new_x, new_v = mh.pso_update(x0, np.zeros(4), x0 + 1, x0 - 1,
                                 0.0, 0.0, 0.0, space, rng)
    pso_ok = np.array_equal(new_x, x0) and np.array_equal(new_v, np.zeros(4))

    # roulette draw frequencies vs computed weights, chi-square p > 0.01
    fitnesses = np.array([1.0, 3.0, 2.0, 7.0, 5.0])
    worst = fitnesses.max()
    weights = worst - fitnesses + 1e-12 * (1.0 + abs(worst))
    probs = weights / weights.sum()
    draws = np.array([mh.roulette_select(fitnesses, rng)[0] for _ in range(10_000)])
    counts = np.bincount(draws, minlength=len(fitnesses))
    p_value = stats.chisquare(counts, 10_000 * probs).pvalue

    report(2, f"operator exactness: donor/crossover/swarm exact, "
              f"roulette chi-square p = {p_value:.3f} > 0.01",
           mutate_ok and cross_ok and pso_ok and p_value > 0.01)


def test_criterion_3_sphere_efficacy():
    space = mh.SearchSpace([mh.ParamSpec(f"x{i}", "continuous", -5, 5)
                            for i in range(3)])

    def sphere(params):
        return sum(v * v for v in params.values())

    start = time.monotonic()
    ratios = {}
    for name, optimize in mh.OPTIMIZERS.items():
        initial, final = [], []
        for seed in range(10):
            cfg = mh.OptimizerConfig(population_size=10, generations=50, seed=seed)
            res = optimize(space, sphere, cfg)
            initial.append(res.trace[0])
            final.append(res.best_fitness)
        ratios[name] = np.median(final) / np.median(initial)
    elapsed = time.monotonic() - start
    summary = ", ".join(f"{k} {v:.2e}" for k, v in sorted(ratios.items()))
    report(3, f"sphere efficacy: median final/initial {summary} "
              f"(all <= 1%) in {elapsed:.1f}s < 10s",
           all(r <= 0.01 for r in ratios.values()) and elapsed < 10.0)


def test_criterion_4_arima_recovery():
    start = time.monotonic()
    rng = np.random.default_rng(42)

    # AR(1), alpha = 0.6
    x = np.zeros(2000)
    e = rng.normal(size=2000)
    for t in range(1, 2000):
        x[t] = 0.6 * x[t - 1] + e[t]
    ar1 = ar.fit_arima(x, ar.ArimaOrder(1, 0, 0))
    alpha_ok = 0.5 <= ar1.ar_coeffs[0] <= 0.7

    # ARMA(1,1), alpha = 0.5, beta = 0.3
    y = np.zeros(5000)
    e = rng.normal(size=5000)
    for t in range(1, 5000):
        y[t] = 0.5 * y[t - 1] + e[t] + 0.3 * e[t - 1]
    arma = ar.fit_arima(y, ar.ArimaOrder(1, 0, 1))
    arma_ok = (abs(arma.ar_coeffs[0] - 0.5) <= 0.1
               and abs(arma.ma_coeffs[0] - 0.3) <= 0.1)

    # differencing round-trips
    z = rng.normal(size=100)
    diff_err = max(
        np.max(np.abs(ar.inverse_difference(*ar.difference(z, d)) - z))
        for d in (1, 2, 3)
    )
    elapsed = time.monotonic() - start
    report(4, f"estimator recovery: AR(1) alpha {ar1.ar_coeffs[0]:.3f} in [0.5,0.7], "
              f"ARMA(1,1) ({arma.ar_coeffs[0]:.3f}, {arma.ma_coeffs[0]:.3f}) within 0.1, "
              f"differencing round-trip {diff_err:.1e} < 1e-9, {elapsed:.1f}s < 30s",
           alpha_ok and arma_ok and diff_err < 1e-9 and elapsed < 30.0)


def test_criterion_5_data_pipeline():
    table = generate_synthetic_weather(days=20, seed=3,
                                       missing_temperature_fraction=0.0,
                                       missing_precipitation_fraction=0.0)
    scaler = fit_scaler(table)
    scaled = scaler_apply(scaler, table, "forward")
    back = scaler_apply(scaler, scaled, "inverse")
    round_trip = np.max(np.abs(back.values - table.values))
    moments = max(np.max(np.abs(scaled.values.mean(axis=0))),
                  np.max(np.abs(scaled.values.std(axis=0) - 1.0)))

    L, H = 3, 24
    counts_ok = True
    for T in range(L + H, L + H + 51):
        sub = TimeSeriesTable(table.timestamps[:T], table.columns, table.values[:T])
        if len(make_windows(sub, "temperature", L, H)) != T - L - H + 1:
            counts_ok = False
            break

    report(5, f"data pipeline: scaler round-trip {round_trip:.1e} < 1e-9, "
              f"train moments off by {moments:.1e} < 1e-9, "
              f"window count exact for T in [{L + H}, {L + H + 50}]",
           round_trip < 1e-9 and moments < 1e-9 and counts_ok)


def test_criterion_6_desk_scale_ordering():
    start = time.monotonic()
    records = run_matrix(ExperimentConfig())   # defaults are the desk scale
    elapsed = time.monotonic() - start

    all_complete = (len(records) == 4 * 4 * 3
                    and not any(r.failed for r in records))

    mape = {(r.optimizer, r.model, r.trial): r.test_mape for r in records}
    wins = {}
    for opt in ("ga", "de", "pso"):
        wins[opt] = sum(
            mape[(opt, "gru", t)] <= mape[("manual", "gru", t)] for t in (1, 2, 3)
        )
    beats_manual = all(w >= 2 for w in wins.values())

    # reported, not asserted: the source benchmark's DE < PSO < GA ordering
    means = {
        opt: np.mean([mape[(opt, m, t)] for m in ("ann", "lstm", "gru", "arima")
                      for t in (1, 2, 3)])
        for opt in ("ga", "de", "pso", "manual")
    }
    order = " < ".join(sorted(("ga", "de", "pso"), key=means.get))
    print(f"\n    mean test MAPE by optimizer: "
          + ", ".join(f"{k} {v:.2f}%" for k, v in sorted(means.items()))
          + f"  (observed ordering {order}; de < pso < ga expected but not asserted)")

    report(6, f"desk-scale ordering: GRU wins vs manual per metaheuristic "
              f"{wins} (each >= 2/3), all 48 runs complete, "
              f"{elapsed / 60:.1f} min < 15 min",
           all_complete and beats_manual and elapsed < 15 * 60)


def test_criterion_7_determinism(tmp_path):
    cfg = ExperimentConfig(
        synthetic_days=20, models=("ann", "arima"), optimizers=("de", "manual"),
        trial_count=1, population_size=5, generations=2, epochs_bounds=(2, 4),
        manual_epochs=3, master_seed=123,
    )
    config_path = tmp_path / "config.yaml"
    cfg.to_yaml(config_path)

    payloads = []
    for run in ("first", "second"):
        out = tmp_path / run
        code = cli_main(["matrix", "--config", str(config_path),
                         "--synthetic", "--out", str(out)])
        assert code == 0
        lines = (out / "records.jsonl").read_text().splitlines()
        cleaned = []
        for line in lines:
            record = json.loads(line)
            record.pop("duration_seconds")
            cleaned.append(record)
        payloads.append(cleaned)

    report(7, "determinism: repeated seeded matrix runs produce identical "
              "records modulo timing fields",
           payloads[0] == payloads[1])


def test_criterion_8_cli_smoke(tmp_path):
    cfg = ExperimentConfig(
        csv_path="data/sample_30day.csv",
        population_size=5, generations=2, trial_count=1,
        output_dir=str(tmp_path / "runs"),
    )
    config_path = tmp_path / "config.yaml"
    cfg.to_yaml(config_path)

    prepare_code = cli_main(["prepare", "--config", str(config_path)])
    tune_code = cli_main(["tune", "--config", str(config_path),
                          "--model", "arima", "--optimizer", "de"])

    payload = json.loads((tmp_path / "runs" / "tune_de_arima.json").read_text())
    bounds = {s["name"]: (s["lower"], s["upper"], s["kind"])
              for s in payload["search_space"]}
    bounds_ok = bounds == {
        "p": (0, 5, "integer"),
        "d": (0, 3, "integer"),
        "q": (0, 5, "integer"),
    }
    params = payload["record"]["best_params"]
    in_bounds = (0 <= params["p"] <= 5 and 0 <= params["d"] <= 3
                 and 0 <= params["q"] <= 5)

    records_path = tmp_path / "runs" / "records.jsonl"
    records_path.write_text(json.dumps(payload["record"]) + "\n")
    report_code = cli_main(["report", "--records", str(records_path),
                            "--out", str(tmp_path / "reports")])

    report(8, f"end-to-end smoke: prepare/tune/report exit codes "
              f"{prepare_code}/{tune_code}/{report_code} all 0, ARIMA search "
              f"bounds exactly p[0,5] d[0,3] q[0,5], best order {params}",
           prepare_code == 0 and tune_code == 0 and report_code == 0
           and bounds_ok and in_bounds)
