"""Compare the three metaheuristics on a known landscape.

The sphere function f(x) = sum(x_i^2) has its global minimum at the origin,
so we can watch each optimizer's best-so-far trace collapse toward zero and
get a feel for their relative convergence speed before pointing them at an
expensive model-training fitness.
"""

import numpy as np

from weathertune.metaheuristics import (
    OPTIMIZERS,
    OptimizerConfig,
    ParamSpec,
    SearchSpace,
)


def sphere(params):
    return sum(v * v for v in params.values())


space = SearchSpace([ParamSpec(f"x{i}", "continuous", -5.0, 5.0) for i in range(3)])
config = OptimizerConfig(population_size=10, generations=50, seed=42)

print("minimizing f(x) = sum(x^2) over [-5, 5]^3")
print(f"population {config.population_size}, {config.generations} generations\n")

for name in ("ga", "de", "pso"):
    result = OPTIMIZERS[name](space, sphere, config)
    trace = result.trace
    print(f"{name.upper():4s} best-so-far trace (every 10th generation):")
    for g in range(0, len(trace), 10):
        print(f"       gen {g:3d}: {trace[g]:.3e}")
    print(f"     final best {result.best_fitness:.3e} at "
          f"{ {k: round(v, 4) for k, v in result.best_params.items()} } "
          f"after {result.evaluations} evaluations\n")

print("All three should land within a few orders of magnitude of zero;")
print("DE is typically the most precise on smooth unimodal problems.")
