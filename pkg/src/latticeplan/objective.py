"""Path-length fitness of a curvature preference alpha on a given grid."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .codec import LatticePath, Side, path_to_tuple, tuple_to_path
from .gridmap import OccupancyGrid, column_clear
from .sampler import RandomStream, SamplerConfig, sample_tuple


class BudgetExhausted(RuntimeError):
    """Raised when a fitness query is made after the budget is spent."""


def tuple_length(t: Sequence[int]) -> float:
    """Polyline length ``t_1 + sum_{i>=2} sqrt(1 + t_i^2)``."""
    return t[0] + sum(math.sqrt(1 + ti * ti) for ti in t[1:])


def path_length(p: LatticePath) -> float:
    total = 0.0
    for (x0, y0), (x1, y1) in zip(p.nodes, p.nodes[1:]):
        total += math.hypot(x1 - x0, y1 - y0)
    return total


def default_penalty(n: int) -> float:
    return 10.0 * n


@dataclass
class EvaluationBudget:
    max_evals: int
    used: int = 0

    @property
    def remaining(self) -> int:
        return self.max_evals - self.used

    @property
    def exhausted(self) -> bool:
        return self.used >= self.max_evals

    def spend(self) -> None:
        if self.exhausted:
            raise BudgetExhausted(f"all {self.max_evals} evaluations used")
        self.used += 1


@dataclass(frozen=True)
class Incumbent:
    alpha: float
    tuple: tuple[int, ...]
    length: float
    side: Side

    @property
    def path(self) -> LatticePath:
        return tuple_to_path(self.tuple, self.side)


@dataclass
class PathObjective:
    """Noisy objective: each call samples a fresh path at the given alpha.

    Failed generations score ``penalty``, which exceeds every feasible
    length, so plain ``<`` comparisons already prefer feasible samples.
    """

    grid: OccupancyGrid
    rng: RandomStream
    budget: EvaluationBudget
    side: Side = Side.ABOVE
    penalty: float | None = None
    strict_collision: bool = True
    incumbent: Incumbent | None = None
    history: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.penalty is None:
            self.penalty = default_penalty(self.grid.n)
        if self.penalty <= 2.0 * (self.grid.n - 1):
            raise ValueError("penalty must exceed the longest feasible path 2(n-1)")
        self.side = Side(self.side)

    @classmethod
    def create(cls, grid: OccupancyGrid, seed: int, max_evals: int, **kw) -> "PathObjective":
        return cls(grid, RandomStream(seed), EvaluationBudget(max_evals), **kw)

    def evaluate(self, alpha: float) -> float:
        self.budget.spend()
        cfg = SamplerConfig(float(alpha), self.side, strict_collision=self.strict_collision)
        t = sample_tuple(self.grid, cfg, self.rng)
        if t is None:
            fitness = self.penalty
        else:
            fitness = tuple_length(t)
            if self.incumbent is None or fitness < self.incumbent.length:
                self.incumbent = Incumbent(float(alpha), t, fitness, self.side)
        self.history.append(fitness)
        return fitness

    __call__ = evaluate


def check_path_free(grid: OccupancyGrid, p: LatticePath) -> bool:
    """Every lattice node visited by ``p`` (rises and steps) is free."""
    t = path_to_tuple(p)
    prev = 0
    for x, ti in enumerate(t):
        lo, hi = prev, prev + ti
        if p.side is Side.ABOVE:
            ok = column_clear(grid, x, lo, hi)
        else:
            ok = not grid.cells[x, lo:hi + 1].any()
        if not ok:
            return False
        prev = hi
    return True
