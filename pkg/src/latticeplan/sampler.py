"""Collision-aware stochastic generation of above-diagonal lattice paths.

Element ``i`` of the tuple is drawn inside its bounds ``[L_i, U_i]`` as
``round(L_i + lam * (U_i - L_i))`` with ``lam = r_i * (i / n) ** alpha``.
Small ``alpha`` pushes early elements to their maximum (L-shaped paths);
large ``alpha`` pins them to their minimum (paths hugging the diagonal).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .codec import LatticePath, Side, tuple_to_path
from .gridmap import OccupancyGrid

ALPHA_CLAMP = 1e6


class RandomStream:
    """Seeded source of uniform draws in ``[0, 1)``.

    ``substream(k)`` derives an independent child stream; the parent is left
    untouched, so the order in which substreams are consumed never matters.
    """

    def __init__(self, seed: int = 0, key: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.key = tuple(key)
        self._gen = np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=self.key))

    def uniform(self) -> float:
        return float(self._gen.random())

    def uniforms(self, k: int) -> list[float]:
        return self._gen.random(k).tolist()

    def substream(self, k: int) -> "RandomStream":
        return RandomStream(self.seed, self.key + (k,))


class FixedStream:
    """Stream that always yields ``value``; pins ``r`` for deterministic checks."""

    def __init__(self, value: float = 1.0):
        self.value = float(value)

    def uniform(self) -> float:
        return self.value

    def uniforms(self, k: int) -> list[float]:
        return [self.value] * k

    def substream(self, k: int) -> "FixedStream":
        return FixedStream(self.value)


@dataclass(frozen=True)
class SamplerConfig:
    alpha: float = 1.0
    side: Side = Side.ABOVE
    rng_seed: int = 0
    strict_collision: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise ValueError(f"alpha must be finite and >= 0, got {self.alpha}")
        object.__setattr__(self, "side", Side(self.side))


@dataclass(frozen=True)
class SamplerState:
    """Recursion state when element ``i`` (1-based) is drawn."""

    i: int
    L: int
    U: int
    S: int
    remaining: int
    x: int
    y: int
    lam: float


def sgn(v: float) -> int:
    return (v > 0) - (v < 0)


def next_bounds(prev_t: int, prev_S: int, prev_U: int) -> tuple[int, int, int]:
    """Bounds for the next element from the previous element and state.

    Start from ``t_0 = 1, S_0 = 0, U_0 = n``.
    """
    S = prev_S + prev_t - 1
    L = min(1, 1 - sgn(prev_t + prev_S - 1))
    U = prev_U - prev_t
    return L, U, S


def lower_bound_from_prefix(prefix: Sequence[int]) -> int:
    """``L_i`` computed directly from ``t_1..t_{i-1}`` with ``t_0 = 1``."""
    return min(1, 1 - sgn(sum(t - 1 for t in prefix)))


def quantize(L: int, U: int, lam: float) -> int:
    """``round(L + lam*(U - L))`` with ties away from zero."""
    v = L + lam * (U - L)
    return int(math.floor(v + 0.5)) if v >= 0 else -int(math.floor(-v + 0.5))


def lambda_of(x: int, n: int, alpha: float, r: float) -> float:
    return r * (x / n) ** min(alpha, ALPHA_CLAMP)


def sample_tuple_free(n: int, alpha: float, rs: Sequence[float],
                      states: list | None = None) -> tuple[int, ...]:
    """Draw a tuple ignoring obstacles, consuming ``rs[0..n-2]``."""
    alpha = min(alpha, ALPHA_CLAMP)
    L, U, S, y = 1, n - 1, 0, 0
    t = []
    for i in range(1, n):
        lam = rs[i - 1] * (i / n) ** alpha
        if states is not None:
            states.append(SamplerState(i, L, U, S, n - i + 1, i - 1, y, lam))
        ti = quantize(L, U, lam)
        t.append(ti)
        y += ti
        S += ti - 1
        U -= ti
        # sgn(S) with negative slack clamped to L = 1
        L = 1 if S <= 0 else 0
    t.append(0)
    return tuple(t)


def _frame(grid: OccupancyGrid, side: Side):
    """Occupancy in the above-diagonal frame, as per-column prefix counts.

    ``cum[x][y]`` counts occupied nodes ``(x, 0..y-1)``.
    """
    cache = grid.__dict__.setdefault("_frames", {})
    if side not in cache:
        cells = grid.cells if side is Side.ABOVE else grid.cells.T
        # cells[y, x] -> columns indexed by x
        cols = cells.T.astype(np.int32)
        cum = np.zeros((grid.n, grid.n + 1), dtype=np.int32)
        np.cumsum(cols, axis=1, out=cum[:, 1:])
        cache[side] = (cum.tolist(), cells.T.tolist())
    return cache[side]


def sample_tuple(grid: OccupancyGrid, cfg: SamplerConfig, rng) -> tuple[int, ...] | None:
    """Tuple of a collision-free path, or ``None`` when an obstacle is hit.

    Always consumes ``n - 1`` draws from ``rng`` so that the stream position
    after a call does not depend on the grid.
    """
    n = grid.n
    rs = rng.uniforms(n - 1)
    t = sample_tuple_free(n, cfg.alpha, rs)
    cum, cols = _frame(grid, cfg.side)
    prev = 0
    if cfg.strict_collision:
        # column x = i - 1 is traversed from row Y_{i-1} up to Y_i
        for x, ti in enumerate(t):
            y = prev + ti
            col = cum[x]
            if col[y + 1] != col[prev]:
                return None
            prev = y
    else:
        for x, ti in enumerate(t):
            prev += ti
            if cols[x][prev]:
                return None
    return t


def generate_path(grid: OccupancyGrid, cfg: SamplerConfig, rng=None) -> LatticePath | None:
    if rng is None:
        rng = RandomStream(cfg.rng_seed)
    t = sample_tuple(grid, cfg, rng)
    if t is None:
        return None
    return tuple_to_path(t, cfg.side)


BOTH_SIDES_SUBSTREAMS = {Side.ABOVE: 0, Side.BELOW: 1}


def generate_both_sides(grid: OccupancyGrid, alpha_above: float, alpha_below: float,
                        rng: RandomStream, strict_collision: bool = True
                        ) -> tuple[LatticePath | None, LatticePath | None]:
    """Generate one path on each side of the diagonal from fixed substreams."""
    out = []
    for side, alpha in ((Side.ABOVE, alpha_above), (Side.BELOW, alpha_below)):
        cfg = SamplerConfig(alpha, side, strict_collision=strict_collision)
        out.append(generate_path(grid, cfg, rng.substream(BOTH_SIDES_SUBSTREAMS[side])))
    return out[0], out[1]


def count_free_paths(grid: OccupancyGrid, side: Side | str = Side.ABOVE) -> int:
    """Number of valid tuples whose every visited node is free.

    Dynamic programming over unit up/right moves restricted to ``y >= x`` in
    the side's frame; an empty grid gives Catalan(n - 1).
    """
    side = Side(side)
    n = grid.n
    cells = grid.cells if side is Side.ABOVE else grid.cells.T
    ways = [[0] * n for _ in range(n)]  # ways[x][y]
    for x in range(n):
        for y in range(x, n):
            if cells[y, x]:
                continue
            if x == 0 and y == 0:
                ways[0][0] = 1
                continue
            # cells below the diagonal keep zero ways
            ways[x][y] = (ways[x][y - 1] if y > 0 else 0) + (ways[x - 1][y] if x > 0 else 0)
    return ways[n - 1][n - 1]
