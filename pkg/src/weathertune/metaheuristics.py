"""Population-based optimizers (GA, DE, PSO) over a bounded mixed
integer/continuous search space with a pluggable scalar fitness.

All three minimize. Candidates live in internal continuous coordinates:
log-scaled parameters are searched in log-space and integer parameters are
rounded only at decode time, so the operators stay generic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, EmptyPopulation, InvalidConfig


@dataclass(frozen=True)
class ParamSpec:
    """One search dimension: continuous, continuous-log, or integer, with
    inclusive bounds."""

    name: str
    kind: str               # "continuous" | "continuous-log" | "integer"
    lower: float
    upper: float

    def __post_init__(self):
        if self.kind not in ("continuous", "continuous-log", "integer"):
            raise InvalidConfig(f"unknown param kind {self.kind!r}")
        if not self.lower < self.upper:
            raise InvalidConfig(f"{self.name}: lower must be < upper")
        if self.kind == "continuous-log" and self.lower <= 0:
            raise InvalidConfig(f"{self.name}: log-scaled bounds must be positive")

    @property
    def internal_bounds(self) -> tuple[float, float]:
        if self.kind == "continuous-log":
            return math.log(self.lower), math.log(self.upper)
        return float(self.lower), float(self.upper)


class SearchSpace:
    """Ordered list of ParamSpec; dimension D = number of specs."""

    def __init__(self, specs: list[ParamSpec]):
        names = [s.name for s in specs]
        if len(set(names)) != len(names):
            raise InvalidConfig("parameter names must be unique")
        self.specs = list(specs)
        bounds = np.array([s.internal_bounds for s in specs], dtype=np.float64)
        self.lower = bounds[:, 0]
        self.upper = bounds[:, 1]

    @property
    def dimension(self) -> int:
        return len(self.specs)

    def clamp(self, position: np.ndarray) -> np.ndarray:
        return np.clip(position, self.lower, self.upper)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(n, self.dimension))


def _round_half_away(x: float) -> float:
    return math.copysign(math.floor(abs(x) + 0.5), x)


def decode_candidate(space: SearchSpace, position: np.ndarray) -> dict:
    """Map internal coordinates to named hyperparameter values."""
    position = np.asarray(position, dtype=np.float64)
    if position.shape != (space.dimension,):
        raise DimensionMismatch(
            f"position has shape {position.shape}, space dimension is {space.dimension}"
        )
    out = {}
    for spec, x in zip(space.specs, position):
        if spec.kind == "continuous":
            out[spec.name] = float(min(max(x, spec.lower), spec.upper))
        elif spec.kind == "continuous-log":
            # exp(log(upper)) can overshoot the bound by one ulp
            out[spec.name] = float(min(max(math.exp(x), spec.lower), spec.upper))
        else:
            v = _round_half_away(float(x))
            out[spec.name] = int(min(max(v, spec.lower), spec.upper))
    return out


def roulette_select(fitnesses: np.ndarray, rng: np.random.Generator) -> tuple[int, int]:
    """Draw two parent indices with probability proportional to
    (worst - fitness + eps); minimization. Identical draws are re-drawn once."""
    fitnesses = np.asarray(fitnesses, dtype=np.float64)
    if fitnesses.size == 0:
        raise EmptyPopulation("cannot select from an empty population")
    if not np.all(np.isfinite(fitnesses)):
        raise ValueError("roulette selection requires finite fitnesses")
    worst = fitnesses.max()
    eps = 1e-12 * (1.0 + abs(worst))
    weights = worst - fitnesses + eps
    probs = weights / weights.sum()
    i = int(rng.choice(len(probs), p=probs))
    j = int(rng.choice(len(probs), p=probs))
    if j == i:
        j = int(rng.choice(len(probs), p=probs))
    return i, j


def uniform_crossover(
    p1: np.ndarray, p2: np.ndarray, crossover_prob: float, rng: np.random.Generator
) -> np.ndarray:
    """Coordinate-wise 50/50 mix of the parents; the whole operator fires
    with probability crossover_prob, otherwise the child copies p1."""
    p1 = np.asarray(p1, dtype=np.float64)
    p2 = np.asarray(p2, dtype=np.float64)
    if p1.shape != p2.shape:
        raise DimensionMismatch("parents have different dimensions")
    if rng.uniform() >= crossover_prob:
        return p1.copy()
    take_p1 = rng.uniform(size=p1.shape) < 0.5
    return np.where(take_p1, p1, p2)


def ga_mutate(
    position: np.ndarray,
    mutation_prob: float,
    mutation_sigma: float,
    space: SearchSpace,
    rng: np.random.Generator,
) -> np.ndarray:
    """Per-coordinate Gaussian perturbation with std sigma*(upper-lower),
    applied with probability mutation_prob, clamped to bounds."""
    position = np.asarray(position, dtype=np.float64).copy()
    mask = rng.uniform(size=position.shape) < mutation_prob
    noise = rng.normal(0.0, 1.0, size=position.shape)
    scale = mutation_sigma * (space.upper - space.lower)
    position[mask] += noise[mask] * scale[mask]
    return space.clamp(position)


def de_mutate(
    x_r1: np.ndarray, x_r2: np.ndarray, x_r3: np.ndarray, F: float, space: SearchSpace
) -> np.ndarray:
    """Donor vector v = x_r1 + F * (x_r2 - x_r3), clamped to bounds."""
    x_r1, x_r2, x_r3 = (np.asarray(x, dtype=np.float64) for x in (x_r1, x_r2, x_r3))
    if not (x_r1.shape == x_r2.shape == x_r3.shape):
        raise DimensionMismatch("donor vectors have different dimensions")
    return space.clamp(x_r1 + F * (x_r2 - x_r3))


def de_crossover(
    x_i: np.ndarray,
    v_i: np.ndarray,
    CR: float,
    force_jrand: bool,
    rng: np.random.Generator,
) -> np.ndarray:
    """Per coordinate take the donor value with probability CR, else keep the
    target's. With force_jrand, one uniformly chosen coordinate is always
    taken from the donor (classic binomial crossover); off by default."""
    x_i = np.asarray(x_i, dtype=np.float64)
    v_i = np.asarray(v_i, dtype=np.float64)
    if x_i.shape != v_i.shape:
        raise DimensionMismatch("target and donor have different dimensions")
    take_v = rng.uniform(size=x_i.shape) <= CR
    if force_jrand:
        take_v[rng.integers(len(x_i))] = True
    return np.where(take_v, v_i, x_i)


def pso_update(
    x: np.ndarray,
    v: np.ndarray,
    p_best: np.ndarray,
    g_best: np.ndarray,
    inertia: float,
    cognitive: float,
    social: float,
    space: SearchSpace,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Standard velocity-then-position update; positions are clamped to the
    bounds and the velocity is zeroed on clamped coordinates."""
    x = np.asarray(x, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    r1 = rng.uniform(size=x.shape)
    r2 = rng.uniform(size=x.shape)
    v_new = inertia * v + cognitive * r1 * (p_best - x) + social * r2 * (g_best - x)
    x_new = x + v_new
    clamped = space.clamp(x_new)
    v_new = np.where(clamped != x_new, 0.0, v_new)
    return clamped, v_new


@dataclass
class OptimizerConfig:
    """Shared optimizer settings plus per-algorithm constants."""

    population_size: int = 10
    generations: int = 10
    seed: int = 0
    # GA
    crossover_prob: float = 0.9
    mutation_prob: float = 0.2
    mutation_sigma: float = 0.1
    # DE
    scale_factor: float = 0.8
    crossover_rate: float = 0.9
    force_jrand: bool = False
    # PSO (constriction-style defaults)
    inertia: float = 0.729
    cognitive: float = 1.49445
    social: float = 1.49445

    def validate(self, algorithm: str) -> None:
        if self.population_size < 2:
            raise InvalidConfig("population_size must be >= 2")
        if algorithm == "de" and self.population_size < 4:
            raise InvalidConfig("DE needs population_size >= 4 (target + 3 donors)")
        if self.generations < 0:
            raise InvalidConfig("generations must be >= 0")
        for name in ("crossover_prob", "mutation_prob", "crossover_rate"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise InvalidConfig(f"{name} must be in [0, 1]")


@dataclass
class OptimizationResult:
    """Best candidate found plus the per-generation best-fitness trace
    (length generations + 1, entry 0 after initialization)."""

    best_params: dict
    best_fitness: float
    best_position: np.ndarray
    trace: list[float] = field(default_factory=list)
    evaluations: int = 0


def _safe_fitness(fitness: Callable[[dict], float], space: SearchSpace, position: np.ndarray) -> float:
    """Evaluate a candidate; exceptions and non-finite values become +inf."""
    try:
        value = float(fitness(decode_candidate(space, position)))
    except Exception:
        return math.inf
    return value if math.isfinite(value) else math.inf


def ga_optimize(
    space: SearchSpace, fitness: Callable[[dict], float], config: OptimizerConfig
) -> OptimizationResult:
    """Genetic algorithm: roulette-wheel parent selection, uniform crossover,
    bounded Gaussian mutation, generational replacement with one elite."""
    config.validate("ga")
    rng = np.random.default_rng(config.seed)
    n = config.population_size

    pop = space.sample(rng, n)
    fit = np.array([_safe_fitness(fitness, space, p) for p in pop])
    evals = n
    best_i = int(np.argmin(fit))
    best_pos, best_fit = pop[best_i].copy(), float(fit[best_i])
    trace = [best_fit]

    for _ in range(config.generations):
        # roulette weights need finite fitnesses; failed candidates get the
        # worst finite value so they carry (near) zero selection weight
        sel_fit = fit.copy()
        if np.isinf(sel_fit).any():
            finite = sel_fit[np.isfinite(sel_fit)]
            ceiling = finite.max() if finite.size else 0.0
            sel_fit[np.isinf(sel_fit)] = ceiling
        children = np.empty_like(pop)
        for k in range(n):
            i, j = roulette_select(sel_fit, rng)
            child = uniform_crossover(pop[i], pop[j], config.crossover_prob, rng)
            children[k] = ga_mutate(
                child, config.mutation_prob, config.mutation_sigma, space, rng
            )
        # elitism: slot 0 carries the best individual, fitness already known
        children[0] = best_pos
        child_fit = np.empty(n)
        child_fit[0] = best_fit
        for k in range(1, n):
            child_fit[k] = _safe_fitness(fitness, space, children[k])
        evals += n - 1
        pop, fit = children, child_fit
        gen_best = int(np.argmin(fit))
        if fit[gen_best] < best_fit:
            best_pos, best_fit = pop[gen_best].copy(), float(fit[gen_best])
        trace.append(best_fit)

    return OptimizationResult(
        best_params=decode_candidate(space, best_pos),
        best_fitness=best_fit,
        best_position=best_pos,
        trace=trace,
        evaluations=evals,
    )


def de_optimize(
    space: SearchSpace, fitness: Callable[[dict], float], config: OptimizerConfig
) -> OptimizationResult:
    """Differential evolution (rand/1 mutation, probabilistic crossover,
    greedy one-to-one replacement)."""
    config.validate("de")
    rng = np.random.default_rng(config.seed)
    n = config.population_size

    pop = space.sample(rng, n)
    fit = np.array([_safe_fitness(fitness, space, p) for p in pop])
    evals = n
    trace = [float(fit.min())]

    for _ in range(config.generations):
        for i in range(n):
            others = [k for k in range(n) if k != i]
            r1, r2, r3 = rng.choice(others, size=3, replace=False)
            v = de_mutate(pop[r1], pop[r2], pop[r3], config.scale_factor, space)
            u = de_crossover(pop[i], v, config.crossover_rate, config.force_jrand, rng)
            fu = _safe_fitness(fitness, space, u)
            evals += 1
            if fu < fit[i]:
                pop[i], fit[i] = u, fu
        trace.append(float(fit.min()))

    best_i = int(np.argmin(fit))
    return OptimizationResult(
        best_params=decode_candidate(space, pop[best_i]),
        best_fitness=float(fit[best_i]),
        best_position=pop[best_i].copy(),
        trace=trace,
        evaluations=evals,
    )


def pso_optimize(
    space: SearchSpace, fitness: Callable[[dict], float], config: OptimizerConfig
) -> OptimizationResult:
    """Particle swarm: inertia-weighted velocity with cognitive and social
    attraction, personal and global best tracking."""
    config.validate("pso")
    rng = np.random.default_rng(config.seed)
    n = config.population_size
    span = np.abs(space.upper - space.lower)

    x = space.sample(rng, n)
    v = rng.uniform(-span, span, size=(n, space.dimension))
    fit = np.array([_safe_fitness(fitness, space, p) for p in x])
    evals = n

    p_best = x.copy()
    p_fit = fit.copy()
    g_i = int(np.argmin(p_fit))
    g_best, g_fit = p_best[g_i].copy(), float(p_fit[g_i])
    trace = [g_fit]

    for _ in range(config.generations):
        for i in range(n):
            x[i], v[i] = pso_update(
                x[i], v[i], p_best[i], g_best,
                config.inertia, config.cognitive, config.social, space, rng,
            )
            f = _safe_fitness(fitness, space, x[i])
            evals += 1
            if f < p_fit[i]:
                p_best[i], p_fit[i] = x[i].copy(), f
                if f < g_fit:
                    g_best, g_fit = x[i].copy(), float(f)
        trace.append(g_fit)

    return OptimizationResult(
        best_params=decode_candidate(space, g_best),
        best_fitness=g_fit,
        best_position=g_best,
        trace=trace,
        evaluations=evals,
    )


OPTIMIZERS = {"ga": ga_optimize, "de": de_optimize, "pso": pso_optimize}
