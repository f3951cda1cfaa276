"""Occupancy grids, the ``.``/``#`` map text format, and seeded map generators.

Cells are stored as ``cells[y, x]`` with ``y = 0`` at the bottom of the map.
In the text format the first line is the top row (``y = n - 1``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np


class MapError(ValueError):
    """Malformed map text or recipe."""


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    cells: np.ndarray
    name: str = ""

    def __post_init__(self):
        cells = np.array(self.cells, dtype=bool)
        if cells.ndim != 2 or cells.shape[0] != cells.shape[1]:
            raise MapError(f"grid must be square, got shape {cells.shape}")
        if cells.shape[0] < 2:
            raise MapError("grid needs at least 2 nodes per side")
        if cells[0, 0]:
            raise MapError("origin (0, 0) is occupied")
        n = cells.shape[0]
        if cells[n - 1, n - 1]:
            raise MapError(f"destination ({n - 1}, {n - 1}) is occupied")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def n(self) -> int:
        return self.cells.shape[0]

    @classmethod
    def empty(cls, n: int, name: str = "empty") -> "OccupancyGrid":
        return cls(np.zeros((n, n), dtype=bool), name)

    def __eq__(self, other):
        if not isinstance(other, OccupancyGrid):
            return NotImplemented
        return np.array_equal(self.cells, other.cells)

    def __hash__(self):
        return hash(self.cells.tobytes())

    def with_obstacles(self, mask: np.ndarray) -> "OccupancyGrid":
        return OccupancyGrid(self.cells | np.asarray(mask, dtype=bool), self.name)


def is_occupied(g: OccupancyGrid, x: int, y: int) -> bool:
    n = g.n
    if not (0 <= x < n and 0 <= y < n):
        return True
    return bool(g.cells[y, x])


def column_clear(g: OccupancyGrid, x: int, y_from: int, y_to: int) -> bool:
    """True iff every node ``(x, y)`` with ``y_from <= y <= y_to`` is free."""
    n = g.n
    if y_from > y_to:
        y_from, y_to = y_to, y_from
    if not 0 <= x < n or y_from < 0 or y_to >= n:
        return False
    return not g.cells[y_from:y_to + 1, x].any()


def save_map(g: OccupancyGrid) -> str:
    rows = []
    for y in range(g.n - 1, -1, -1):
        rows.append("".join("#" if c else "." for c in g.cells[y]))
    return "\n".join(rows) + "\n"


def load_map(text: str, name: str = "") -> OccupancyGrid:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    n = len(lines)
    if n == 0:
        raise MapError("empty map")
    cells = np.zeros((n, n), dtype=bool)
    for row, line in enumerate(lines):
        if len(line) != n:
            raise MapError(f"line {row + 1} has {len(line)} characters, expected {n}")
        bad = set(line) - {".", "#"}
        if bad:
            raise MapError(f"line {row + 1} has illegal characters {sorted(bad)}")
        cells[n - 1 - row] = [c == "#" for c in line]
    return OccupancyGrid(cells, name)


def read_map(path) -> OccupancyGrid:
    from pathlib import Path

    path = Path(path)
    return load_map(path.read_text(encoding="utf-8"), name=path.stem)


# --------------------------------------------------------------------------
# generators

KINDS = ("rectangles", "polygon", "narrow-passage", "random-blobs")


@dataclass(frozen=True)
class MapRecipe:
    """A generator kind with its parameters.

    ``layers`` holds further recipes whose obstacles are OR-ed in, which is
    how mixed maps are described.
    """

    kind: str
    n: int = 50
    params: dict = field(default_factory=dict)
    seed: int = 0
    name: str = ""
    layers: tuple["MapRecipe", ...] = ()

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"name": self.name, "kind": self.kind, "n": self.n,
                             "seed": self.seed, "params": self.params}
        if self.layers:
            d["layers"] = [layer.to_dict() for layer in self.layers]
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "MapRecipe":
        try:
            kind = d["kind"]
            n = int(d.get("n", 50))
            layers = tuple(cls.from_dict({"n": n, **layer}) for layer in d.get("layers", ()))
            return cls(kind=kind, n=n, params=dict(d.get("params", {})),
                       seed=int(d.get("seed", 0)), name=d.get("name", ""), layers=layers)
        except (KeyError, TypeError, ValueError) as exc:
            raise MapError(f"bad recipe: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "MapRecipe":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise MapError(f"recipe is not valid JSON: {exc}") from exc


def _check_point(n: int, x, y, what: str) -> None:
    if not (0 <= x <= n - 1 and 0 <= y <= n - 1):
        raise MapError(f"{what} point ({x}, {y}) lies outside the {n}x{n} grid")


def _fill_rect(mask: np.ndarray, rect: Sequence[int]) -> None:
    n = mask.shape[0]
    if len(rect) != 4:
        raise MapError(f"rectangle needs [x0, y0, x1, y1], got {rect}")
    x0, y0, x1, y1 = (int(v) for v in rect)
    _check_point(n, x0, y0, "rectangle")
    _check_point(n, x1, y1, "rectangle")
    mask[min(y0, y1):max(y0, y1) + 1, min(x0, x1):max(x0, x1) + 1] = True


def polygon_mask(n: int, vertices: Sequence[Sequence[float]]) -> np.ndarray:
    """Nodes inside or on the boundary of a simple polygon (even-odd rule)."""
    if len(vertices) < 3:
        raise MapError("polygon needs at least 3 vertices")
    for x, y in vertices:
        _check_point(n, x, y, "polygon")
    ys, xs = np.mgrid[0:n, 0:n].astype(float)
    inside = np.zeros((n, n), dtype=bool)
    on_edge = np.zeros((n, n), dtype=bool)
    verts = [(float(x), float(y)) for x, y in vertices]
    for (x0, y0), (x1, y1) in zip(verts, verts[1:] + verts[:1]):
        cross = (x1 - x0) * (ys - y0) - (y1 - y0) * (xs - x0)
        within = ((xs >= min(x0, x1)) & (xs <= max(x0, x1))
                  & (ys >= min(y0, y1)) & (ys <= max(y0, y1)))
        on_edge |= (np.abs(cross) < 1e-9) & within
        straddles = (y0 > ys) != (y1 > ys)
        if y1 != y0:
            x_hit = x0 + (ys - y0) * (x1 - x0) / (y1 - y0)
            inside ^= straddles & (xs < x_hit)
    return inside | on_edge


def l_shape(x: int, y: int, width: int, height: int, thickness: int) -> list[list[int]]:
    """Vertices of an L with its corner at ``(x, y)``; flip by negating sizes."""
    sx = 1 if width > 0 else -1
    sy = 1 if height > 0 else -1
    w, h, k = abs(width), abs(height), thickness - 1
    pts = [(0, 0), (w, 0), (w, k), (k, k), (k, h), (0, h)]
    return [[x + sx * px, y + sy * py] for px, py in pts]


def u_shape(x: int, y: int, width: int, height: int, thickness: int) -> list[list[int]]:
    """Vertices of a U whose base runs along ``y`` from ``x`` to ``x + width``.

    A negative ``height`` opens the U downwards.
    """
    sy = 1 if height > 0 else -1
    w, h, k = width, abs(height), thickness - 1
    pts = [(0, 0), (w, 0), (w, h), (w - k, h), (w - k, k), (k, k), (k, h), (0, h)]
    return [[x + px, y + sy * py] for px, py in pts]


def _gen_rectangles(n: int, params: dict, rng: np.random.Generator) -> np.ndarray:
    mask = np.zeros((n, n), dtype=bool)
    for rect in params.get("rects", ()):
        _fill_rect(mask, rect)
    return mask


def _gen_polygon(n: int, params: dict, rng: np.random.Generator) -> np.ndarray:
    mask = np.zeros((n, n), dtype=bool)
    for verts in params.get("polygons", ()):
        mask |= polygon_mask(n, verts)
    for spec in params.get("l_shapes", ()):
        mask |= polygon_mask(n, l_shape(**spec))
    for spec in params.get("u_shapes", ()):
        mask |= polygon_mask(n, u_shape(**spec))
    return mask


def _gen_narrow_passage(n: int, params: dict, rng: np.random.Generator) -> np.ndarray:
    """Walls of given thickness with free gaps.

    Each wall is ``{"orient": "h"|"v", "at": int, "span": [a, b],
    "thickness": int, "gaps": [[start, width], ...]}``; a horizontal wall
    occupies rows ``at..at+thickness-1`` over columns ``a..b``.
    """
    mask = np.zeros((n, n), dtype=bool)
    for wall in params.get("walls", ()):
        orient = wall.get("orient", "h")
        at = int(wall["at"])
        a, b = (int(v) for v in wall.get("span", (0, n - 1)))
        thick = int(wall.get("thickness", 1))
        if thick < 1:
            raise MapError("wall thickness must be >= 1")
        _check_point(n, a, at, "wall")
        _check_point(n, b, at + thick - 1, "wall")
        band = np.zeros(n, dtype=bool)
        band[a:b + 1] = True
        for start, width in wall.get("gaps", ()):
            if width < 1:
                raise MapError("corridor width must be >= 1")
            _check_point(n, start, at, "gap")
            band[start:start + width] = False
        if orient == "h":
            mask[at:at + thick, :] |= band[None, :]
        elif orient == "v":
            mask[:, at:at + thick] |= band[:, None]
        else:
            raise MapError(f"wall orient must be 'h' or 'v', got {orient!r}")
    for rect in params.get("rects", ()):
        _fill_rect(mask, rect)
    return mask


def _gen_random_blobs(n: int, params: dict, rng: np.random.Generator) -> np.ndarray:
    """Seeded discs, optionally confined to a box ``region = [x0, y0, x1, y1]``."""
    count = int(params.get("count", 8))
    rmin, rmax = params.get("radius", (2, 5))
    x0, y0, x1, y1 = params.get("region", (0, 0, n - 1, n - 1))
    _check_point(n, x0, y0, "region")
    _check_point(n, x1, y1, "region")
    ys, xs = np.mgrid[0:n, 0:n]
    mask = np.zeros((n, n), dtype=bool)
    for _ in range(count):
        cx = rng.integers(x0, x1 + 1)
        cy = rng.integers(y0, y1 + 1)
        r = rng.uniform(rmin, rmax)
        mask |= (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r
    return mask


_GENERATORS = {
    "rectangles": _gen_rectangles,
    "polygon": _gen_polygon,
    "narrow-passage": _gen_narrow_passage,
    "random-blobs": _gen_random_blobs,
}


def _obstacles(recipe: MapRecipe, n: int) -> np.ndarray:
    try:
        gen = _GENERATORS[recipe.kind]
    except KeyError:
        raise MapError(f"unknown generator kind {recipe.kind!r}; expected one of {KINDS}") from None
    rng = np.random.default_rng(recipe.seed)
    try:
        mask = gen(n, recipe.params, rng)
    except MapError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise MapError(f"bad {recipe.kind} parameters: {exc}") from exc
    for layer in recipe.layers:
        mask |= _obstacles(layer, n)
    return mask


def generate_map(recipe: MapRecipe) -> OccupancyGrid:
    n = recipe.n
    if n < 2:
        raise MapError("grid needs at least 2 nodes per side")
    mask = _obstacles(recipe, n)
    mask[0, 0] = False
    mask[n - 1, n - 1] = False
    return OccupancyGrid(mask, recipe.name)
