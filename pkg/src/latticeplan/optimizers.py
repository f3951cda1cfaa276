"""Population heuristics over the scalar curvature preference alpha.

All optimizers share one driver contract: they query the objective until its
budget is exhausted, never beyond, and record a best-so-far trace with one
entry per evaluation.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .objective import Incumbent, PathObjective

KINDS = ("pso", "debest", "derand", "sade", "rbde")
OPTIMIZER_STREAM = 1


@dataclass(frozen=True)
class SearchDomain:
    alpha_min: float = 0.0
    alpha_max: float = 10.0

    def __post_init__(self):
        if not self.alpha_min < self.alpha_max:
            raise ValueError("alpha_min must be < alpha_max")

    @property
    def width(self) -> float:
        return self.alpha_max - self.alpha_min

    def clamp(self, x):
        return np.clip(x, self.alpha_min, self.alpha_max)


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str = "derand"
    population: int = 10
    omega: float = 0.7
    c1: float = 2.05
    c2: float = 2.05
    CR: float = 0.5
    F: float = 0.7
    beta: float = 2.0
    learning_period: int = 50
    f_mean: float = 0.5
    f_sd: float = 0.3
    cr_init: float = 0.5
    cr_sd: float = 0.1
    alpha_min: float = 0.0
    alpha_max: float = 10.0
    seed: int = 0

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in KINDS:
            raise ValueError(f"unknown optimizer {self.kind!r}; valid kinds: {', '.join(KINDS)}")
        object.__setattr__(self, "kind", kind)
        min_pop = 6 if kind == "sade" else 4
        if self.population < min_pop:
            raise ValueError(f"{kind} needs a population of at least {min_pop}")
        if kind == "rbde" and self.beta <= 1:
            raise ValueError("rbde needs beta > 1")

    @property
    def domain(self) -> SearchDomain:
        return SearchDomain(self.alpha_min, self.alpha_max)

    def replace(self, **kw) -> "OptimizerConfig":
        return OptimizerConfig(**{**asdict(self), **kw})

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "OptimizerConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown optimizer config fields: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "OptimizerConfig":
        return cls.from_dict(json.loads(text))


@dataclass
class ConvergenceTrace:
    evals: list[int] = field(default_factory=list)
    best: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.best)

    def record(self, fitness: float) -> None:
        prev = self.best[-1] if self.best else math.inf
        self.evals.append(len(self.evals) + 1)
        self.best.append(min(prev, fitness))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["evaluation_index", "best_fitness"])
        for e, b in zip(self.evals, self.best):
            w.writerow([e, repr(b)])
        return buf.getvalue()


@dataclass
class OptimizationResult:
    kind: str
    best_alpha: float | None
    best_fitness: float
    incumbent: Incumbent | None
    trace: ConvergenceTrace


class _Run:
    """Objective wrapper that keeps the trace and the best query."""

    def __init__(self, obj: PathObjective):
        self.obj = obj
        self.trace = ConvergenceTrace()
        self.best_alpha: float | None = None
        self.best_fitness = math.inf

    @property
    def exhausted(self) -> bool:
        return self.obj.budget.exhausted

    def __call__(self, alpha: float) -> float:
        f = self.obj.evaluate(float(alpha))
        self.trace.record(f)
        if f < self.best_fitness:
            self.best_fitness, self.best_alpha = f, float(alpha)
        return f

    def evaluate_all(self, xs: np.ndarray, fit: np.ndarray) -> int:
        """Evaluate ``xs`` in order while budget lasts; returns how many ran."""
        done = 0
        for i, x in enumerate(xs):
            if self.exhausted:
                break
            fit[i] = self(x)
            done += 1
        return done


def _init_population(cfg: OptimizerConfig, rng: np.random.Generator) -> np.ndarray:
    d = cfg.domain
    return d.alpha_min + d.width * rng.random(cfg.population)


# --------------------------------------------------------------------------
# PSO


@dataclass
class Swarm:
    x: np.ndarray
    v: np.ndarray
    fit: np.ndarray
    pbest_x: np.ndarray
    pbest_fit: np.ndarray

    @property
    def gbest(self) -> tuple[float, float]:
        i = int(np.argmin(self.pbest_fit))
        return float(self.pbest_x[i]), float(self.pbest_fit[i])


def velocity_update(v, x, pbest, gbest, r1, r2, omega, c1, c2):
    return omega * v + c1 * r1 * (pbest - x) + c2 * r2 * (gbest - x)


def pso_step(swarm: Swarm, gbest: float, rng, cfg: OptimizerConfig) -> Swarm:
    """Move every particle; evaluation and best updates happen in ``update_bests``."""
    n = len(swarm.x)
    r1 = rng.random(n)
    r2 = rng.random(n)
    v = velocity_update(swarm.v, swarm.x, swarm.pbest_x, gbest, r1, r2, cfg.omega, cfg.c1, cfg.c2)
    vmax = cfg.domain.width
    v = np.clip(v, -vmax, vmax)
    x = cfg.domain.clamp(swarm.x + v)
    return Swarm(x, v, np.full(n, np.inf), swarm.pbest_x.copy(), swarm.pbest_fit.copy())


def update_bests(swarm: Swarm, evaluated: int) -> None:
    idx = np.arange(evaluated)
    better = swarm.fit[idx] < swarm.pbest_fit[idx]
    swarm.pbest_x[idx[better]] = swarm.x[idx[better]]
    swarm.pbest_fit[idx[better]] = swarm.fit[idx[better]]


def run_pso(cfg: OptimizerConfig, run: _Run, rng: np.random.Generator) -> None:
    x = _init_population(cfg, rng)
    n = len(x)
    fit = np.full(n, np.inf)
    run.evaluate_all(x, fit)
    swarm = Swarm(x, np.zeros(n), fit, x.copy(), fit.copy())
    while not run.exhausted:
        gbest, _ = swarm.gbest
        swarm = pso_step(swarm, gbest, rng, cfg)
        done = run.evaluate_all(swarm.x, swarm.fit)
        update_bests(swarm, done)


# --------------------------------------------------------------------------
# DE


def _pick(rng, n: int, k: int, exclude: int) -> list[int]:
    """``k`` mutually distinct indices in ``[0, n)``, none equal to ``exclude``."""
    if n - 1 < k:
        raise ValueError(f"need at least {k + 1} individuals")
    chosen: list[int] = []
    while len(chosen) < k:
        i = int(rng.integers(n))
        if i != exclude and i not in chosen:
            chosen.append(i)
    return chosen


def de_mutate(kind: str, pop: np.ndarray, fit: np.ndarray, target: int, F: float,
              rng, domain: SearchDomain) -> float:
    """``rand``: x_r1 + F(x_r2 - x_r3); ``best``: x_best + F(x_r1 - x_r2)."""
    if len(pop) < 4:
        raise ValueError("DE mutation needs at least 4 individuals")
    if kind == "rand":
        r1, r2, r3 = _pick(rng, len(pop), 3, target)
        v = pop[r1] + F * (pop[r2] - pop[r3])
    elif kind == "best":
        r1, r2 = _pick(rng, len(pop), 2, target)
        v = pop[int(np.argmin(fit))] + F * (pop[r1] - pop[r2])
    else:
        raise ValueError(f"unknown DE mutation {kind!r}")
    return float(domain.clamp(v))


def binomial_crossover(target: np.ndarray, mutant: np.ndarray, CR: float, rng) -> np.ndarray:
    """Each coordinate comes from the mutant with probability CR; one forced index always does.

    For a single dimension the forced index is the only one, so the trial is
    the mutant regardless of CR.
    """
    target = np.atleast_1d(target)
    mutant = np.atleast_1d(mutant)
    d = len(target)
    take = rng.random(d) < CR
    take[rng.integers(d)] = True
    return np.where(take, mutant, target)


def greedy_select(target_x: float, target_f: float, trial_x: float, trial_f: float
                  ) -> tuple[float, float, bool]:
    """Keep the better of target and trial; ties go to the trial."""
    if trial_f <= target_f:
        return trial_x, trial_f, True
    return target_x, target_f, False


def de_crossover_select(target_x: float, target_f: float, mutant: float, CR: float, rng,
                        obj: Callable[[float], float]) -> tuple[float, float, bool]:
    trial = float(binomial_crossover(np.array([target_x]), np.array([mutant]), CR, rng)[0])
    return greedy_select(target_x, target_f, trial, obj(trial))


def run_de(cfg: OptimizerConfig, run: _Run, rng: np.random.Generator, mutation: str) -> None:
    pop = _init_population(cfg, rng)
    fit = np.full(len(pop), np.inf)
    run.evaluate_all(pop, fit)
    domain = cfg.domain
    while not run.exhausted:
        new_pop, new_fit = pop.copy(), fit.copy()
        for i in range(len(pop)):
            if run.exhausted:
                break
            v = de_mutate(mutation, pop, fit, i, cfg.F, rng, domain)
            new_pop[i], new_fit[i], _ = de_crossover_select(pop[i], fit[i], v, cfg.CR, rng, run)
        pop, fit = new_pop, new_fit


# --------------------------------------------------------------------------
# rank-based DE


def whitley_index(u: float, n: int, beta: float) -> int:
    """Linear-bias rank index; small ``u`` favours the best (index 0)."""
    idx = n / (2 * (beta - 1)) * (beta - math.sqrt(beta * beta - 4 * (beta - 1) * u))
    return min(max(int(math.floor(idx)), 0), n - 1)


def rbde_select_indices(n: int, beta: float, rng, k: int = 3, exclude: int | None = None
                        ) -> list[int]:
    """``k`` distinct rank positions (0 = best), drawn with Whitley bias."""
    if n - (exclude is not None) < k:
        raise ValueError("population too small for the requested donors")
    chosen: list[int] = []
    while len(chosen) < k:
        i = whitley_index(float(rng.random()), n, beta)
        if i != exclude and i not in chosen:
            chosen.append(i)
    return chosen


def run_rbde(cfg: OptimizerConfig, run: _Run, rng: np.random.Generator) -> None:
    pop = _init_population(cfg, rng)
    fit = np.full(len(pop), np.inf)
    run.evaluate_all(pop, fit)
    domain = cfg.domain
    while not run.exhausted:
        order = np.argsort(fit, kind="stable")
        rank_of = np.empty_like(order)
        rank_of[order] = np.arange(len(order))
        new_pop, new_fit = pop.copy(), fit.copy()
        for i in range(len(pop)):
            if run.exhausted:
                break
            r1, r2, r3 = (order[j] for j in
                          rbde_select_indices(len(pop), cfg.beta, rng, 3, exclude=int(rank_of[i])))
            v = float(domain.clamp(pop[r1] + cfg.F * (pop[r2] - pop[r3])))
            new_pop[i], new_fit[i], _ = de_crossover_select(pop[i], fit[i], v, cfg.CR, rng, run)
        pop, fit = new_pop, new_fit


# --------------------------------------------------------------------------
# SaDE

SADE_STRATEGIES = ("rand/1/bin", "rand-to-best/2/bin", "rand/2/bin", "current-to-rand/1")
SADE_EPSILON = 0.01


@dataclass
class SadeState:
    probs: np.ndarray = field(default_factory=lambda: np.full(4, 0.25))
    crm: np.ndarray = field(default_factory=lambda: np.full(4, 0.5))
    successes: np.ndarray = field(default_factory=lambda: np.zeros(4, dtype=int))
    failures: np.ndarray = field(default_factory=lambda: np.zeros(4, dtype=int))
    cr_memory: list[list[float]] = field(default_factory=lambda: [[] for _ in range(4)])
    generation: int = 0

    @classmethod
    def initial(cls, cr_init: float = 0.5) -> "SadeState":
        return cls(crm=np.full(4, cr_init))

    def record(self, k: int, success: bool, cr: float) -> None:
        if success:
            self.successes[k] += 1
            self.cr_memory[k].append(cr)
        else:
            self.failures[k] += 1

    def end_generation(self, learning_period: int) -> None:
        self.generation += 1
        if self.generation % learning_period == 0:
            self.learn()

    def learn(self) -> None:
        """Recompute strategy probabilities and CR medians, then clear memories."""
        trials = self.successes + self.failures
        if trials.sum() > 0:
            rate = np.divide(self.successes, trials, out=np.zeros(4), where=trials > 0)
            score = rate + SADE_EPSILON
            self.probs = score / score.sum()
        for k, mem in enumerate(self.cr_memory):
            if mem:
                self.crm[k] = float(np.median(mem))
        self.successes[:] = 0
        self.failures[:] = 0
        self.cr_memory = [[] for _ in range(4)]


def sade_mutant(k: int, pop: np.ndarray, fit: np.ndarray, i: int, F: float, rng) -> float:
    x = pop
    best = x[int(np.argmin(fit))]
    if k == 0:
        r1, r2, r3 = _pick(rng, len(x), 3, i)
        return x[r1] + F * (x[r2] - x[r3])
    if k == 1:
        r1, r2, r3, r4 = _pick(rng, len(x), 4, i)
        return x[i] + F * (best - x[i]) + F * (x[r1] - x[r2]) + F * (x[r3] - x[r4])
    if k == 2:
        r1, r2, r3, r4, r5 = _pick(rng, len(x), 5, i)
        return x[r1] + F * (x[r2] - x[r3]) + F * (x[r4] - x[r5])
    r1, r2, r3 = _pick(rng, len(x), 3, i)
    K = rng.random()
    return x[i] + K * (x[r1] - x[i]) + F * (x[r2] - x[r3])


def _draw_cr(rng, mean: float, sd: float) -> float:
    while True:
        cr = rng.normal(mean, sd)
        if 0.0 <= cr <= 1.0:
            return float(cr)


def sade_step(state: SadeState, pop: np.ndarray, fit: np.ndarray, run, rng,
              cfg: OptimizerConfig) -> tuple[np.ndarray, np.ndarray]:
    """One generation; returns the surviving population and fitness."""
    domain = cfg.domain
    new_pop, new_fit = pop.copy(), fit.copy()
    for i in range(len(pop)):
        if run.exhausted:
            break
        k = min(int(np.searchsorted(np.cumsum(state.probs), rng.random(), side="right")), 3)
        F = rng.normal(cfg.f_mean, cfg.f_sd)
        cr = _draw_cr(rng, state.crm[k], cfg.cr_sd)
        v = float(domain.clamp(sade_mutant(k, pop, fit, i, F, rng)))
        if k == 3:
            # current-to-rand skips crossover
            new_pop[i], new_fit[i], won = greedy_select(pop[i], fit[i], v, run(v))
        else:
            new_pop[i], new_fit[i], won = de_crossover_select(pop[i], fit[i], v, cr, rng, run)
        state.record(k, won, cr)
    state.end_generation(cfg.learning_period)
    return new_pop, new_fit


def run_sade(cfg: OptimizerConfig, run: _Run, rng: np.random.Generator) -> None:
    pop = _init_population(cfg, rng)
    fit = np.full(len(pop), np.inf)
    run.evaluate_all(pop, fit)
    state = SadeState.initial(cfg.cr_init)
    while not run.exhausted:
        pop, fit = sade_step(state, pop, fit, run, rng, cfg)


# --------------------------------------------------------------------------


def optimizer_rng(cfg: OptimizerConfig) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(OPTIMIZER_STREAM,)))


def optimize(kind: str, cfg: OptimizerConfig, obj: PathObjective) -> OptimizationResult:
    """Run ``kind`` on ``obj`` until its budget is spent."""
    cfg = cfg.replace(kind=kind)
    run = _Run(obj)
    rng = optimizer_rng(cfg)
    if obj.budget.remaining > 0:
        if cfg.kind == "pso":
            run_pso(cfg, run, rng)
        elif cfg.kind == "debest":
            run_de(cfg, run, rng, "best")
        elif cfg.kind == "derand":
            run_de(cfg, run, rng, "rand")
        elif cfg.kind == "sade":
            run_sade(cfg, run, rng)
        else:
            run_rbde(cfg, run, rng)
    best_fitness = run.best_fitness if run.trace else obj.penalty
    return OptimizationResult(cfg.kind, run.best_alpha, best_fitness, obj.incumbent, run.trace)
