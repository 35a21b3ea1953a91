"""Run a reduced benchmark matrix end to end and print the summary table.

The full experiment crosses four models with three metaheuristics plus a
fixed manual baseline. Here we shrink everything (20 days of synthetic
hourly weather, two models, one trial, tiny populations) so the whole run
takes well under a minute while exercising the same pipeline: prepare,
search, retrain, score on the held-out test split, emit reports.
"""

from pathlib import Path

from weathertune.harness import ExperimentConfig, emit_reports, run_matrix

config = ExperimentConfig(
    synthetic_days=20,
    synthetic_seed=11,
    models=("ann", "arima"),
    optimizers=("de", "pso", "manual"),
    trial_count=1,
    population_size=5,
    generations=3,
    epochs_bounds=(2, 6),
    manual_epochs=4,
    output_dir="demo_runs",
)

print(f"config hash {config.hash()}, master seed {config.master_seed}")
print(f"models {config.models}, optimizers {config.optimizers}\n")

records = run_matrix(config)

print(f"{'optimizer':>9s}  {'model':>6s}  {'val MSE':>10s}  "
      f"{'test MSE':>10s}  {'test MAPE':>9s}  {'evals':>5s}  best hyperparameters")
for r in sorted(records, key=lambda r: (r.model, r.test_mape or 0)):
    if r.failed:
        print(f"{r.optimizer:>9s}  {r.model:>6s}  failed: {r.error}")
        continue
    print(f"{r.optimizer:>9s}  {r.model:>6s}  {r.validation_fitness:10.4f}  "
          f"{r.test_mse:10.4f}  {r.test_mape:8.2f}%  {r.fitness_evaluations:5d}  "
          f"{r.best_params}")

files = emit_reports(records, config.output_dir)
print(f"\n{len(files)} report files written to {Path(config.output_dir).resolve()}:")
for f in sorted(files):
    print(f"  {f.name}")
