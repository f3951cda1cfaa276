"""Tuple encoding of ordered trees and its bijections to trees and lattice paths.

A tuple ``t = (t_1, ..., t_n)`` lists the child count of each node of an
ordered rooted tree in preorder.  Read as relative column heights, the same
tuple describes a monotone lattice path from ``(0, 0)`` to ``(n-1, n-1)`` on an
``n x n`` node grid that never drops below the diagonal.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from itertools import accumulate
from typing import Iterable, Sequence


class Side(str, Enum):
    ABOVE = "above"
    BELOW = "below"


class TupleError(ValueError):
    """Raised when a sequence is not a valid tree tuple."""


class PathError(ValueError):
    """Raised when a node sequence is not a valid lattice path."""


@dataclass(frozen=True)
class Verdict:
    valid: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.valid


def validate_tuple(t: Sequence[int]) -> Verdict:
    """Check the tuple invariants, reporting the first one violated."""
    n = len(t)
    if n == 0:
        return Verdict(False, "empty tuple")
    for i, ti in enumerate(t, start=1):
        if isinstance(ti, bool) or int(ti) != ti:
            return Verdict(False, f"t_{i}={ti!r} is not an integer")
        if not 0 <= ti <= n - 1:
            return Verdict(False, f"t_{i}={ti} outside [0, {n - 1}]")
    total = 0
    for i, ti in enumerate(t[:-1], start=1):
        total += ti
        if total < i:
            return Verdict(False, f"prefix sum {total} < {i} at i={i}")
    if t[-1] != 0:
        return Verdict(False, f"t_n={t[-1]} must be 0")
    if total != n - 1:
        return Verdict(False, f"sum {total} != n-1={n - 1}")
    return Verdict(True)


def _require_valid(t: Sequence[int]) -> tuple[int, ...]:
    verdict = validate_tuple(t)
    if not verdict:
        raise TupleError(verdict.reason)
    return tuple(int(v) for v in t)


@dataclass(frozen=True)
class LatticePath:
    nodes: tuple[tuple[int, int], ...]
    side: Side = Side.ABOVE

    @property
    def n(self) -> int:
        return len(self.nodes) - 1

    def to_json(self) -> str:
        return json.dumps([list(p) for p in self.nodes])

    @classmethod
    def from_json(cls, text: str, side: Side | str | None = None) -> "LatticePath":
        nodes = tuple((int(x), int(y)) for x, y in json.loads(text))
        if side is None:
            side = infer_side(nodes)
        return cls(nodes, Side(side))


def infer_side(nodes: Sequence[tuple[int, int]]) -> Side:
    """Side of the diagonal a node sequence lives on (ties go to ``ABOVE``)."""
    if all(y >= x for x, y in nodes):
        return Side.ABOVE
    return Side.BELOW


def tuple_to_path(t: Sequence[int], side: Side | str = Side.ABOVE) -> LatticePath:
    t = _require_valid(t)
    side = Side(side)
    nodes = [(0, 0)]
    nodes.extend((i, y) for i, y in enumerate(accumulate(t)))
    if side is Side.BELOW:
        nodes = [(y, x) for x, y in nodes]
    return LatticePath(tuple(nodes), side)


def path_to_tuple(p: LatticePath) -> tuple[int, ...]:
    nodes = list(p.nodes)
    if p.side is Side.BELOW:
        nodes = [(y, x) for x, y in nodes]
    if len(nodes) < 3:
        raise PathError("a path needs the origin plus at least two columns")
    if nodes[0] != (0, 0):
        raise PathError(f"path must start at (0, 0), got {nodes[0]}")
    n = len(nodes) - 1
    t = []
    prev_y = 0
    for i, (x, y) in enumerate(nodes[1:]):
        if x != i:
            raise PathError(f"node {i + 1} has x={x}, expected {i}")
        if y < prev_y:
            raise PathError(f"path descends at column {x}")
        if y < x:
            raise PathError(f"node ({x}, {y}) is on the wrong side of the diagonal")
        t.append(y - prev_y)
        prev_y = y
    if nodes[-1] != (n - 1, n - 1):
        raise PathError(f"path must end at ({n - 1}, {n - 1}), got {nodes[-1]}")
    verdict = validate_tuple(t)
    if not verdict:
        raise PathError(verdict.reason)
    return tuple(t)


@dataclass(frozen=True)
class TreeNode:
    children: int
    parent: int | None


@dataclass(frozen=True)
class OrderedTree:
    """Nodes in preorder; ``parent`` indexes into ``nodes``."""

    nodes: tuple[TreeNode, ...]

    def child_lists(self) -> list[list[int]]:
        kids: list[list[int]] = [[] for _ in self.nodes]
        for i, node in enumerate(self.nodes):
            if node.parent is not None:
                kids[node.parent].append(i)
        return kids

    @property
    def edge_count(self) -> int:
        return sum(node.parent is not None for node in self.nodes)


def tuple_to_tree(t: Sequence[int]) -> OrderedTree:
    """Rebuild the tree with a stack of nodes that still expect children."""
    t = _require_valid(t)
    nodes = [TreeNode(t[0], None)]
    stack = [[0, t[0]]] if t[0] else []
    for count in t[1:]:
        top = stack[-1]
        nodes.append(TreeNode(count, top[0]))
        top[1] -= 1
        if top[1] == 0:
            stack.pop()
        if count:
            stack.append([len(nodes) - 1, count])
    return OrderedTree(tuple(nodes))


def tree_to_tuple(tree: OrderedTree) -> tuple[int, ...]:
    kids = tree.child_lists()
    out = []
    stack = [0]
    while stack:
        i = stack.pop()
        out.append(len(kids[i]))
        stack.extend(reversed(kids[i]))
    return tuple(out)


MAX_ENUMERATION_N = 15


def enumerate_tuples(n: int) -> list[tuple[int, ...]]:
    """All valid tuples on ``n`` nodes, in lexicographic order."""
    if not 2 <= n <= MAX_ENUMERATION_N:
        raise ValueError(f"n must lie in [2, {MAX_ENUMERATION_N}], got {n}")
    out: list[tuple[int, ...]] = []
    prefix: list[int] = []

    def extend(i: int, total: int) -> None:
        # i: 1-based index of the element being chosen, total: sum so far
        if i == n:
            out.append(tuple(prefix) + (0,))
            return
        lo = max(0, i - total)
        for v in range(lo, n - 1 - total + 1):
            prefix.append(v)
            extend(i + 1, total + v)
            prefix.pop()

    extend(1, 0)
    return out


def format_tuple(t: Iterable[int]) -> str:
    return ",".join(str(v) for v in t)


def parse_tuple(line: str) -> tuple[int, ...]:
    return tuple(int(v) for v in line.strip().split(","))


def dump_tuples(tuples: Iterable[Sequence[int]]) -> str:
    return "".join(format_tuple(t) + "\n" for t in tuples)


def load_tuples(text: str) -> list[tuple[int, ...]]:
    return [parse_tuple(line) for line in text.splitlines() if line.strip()]
