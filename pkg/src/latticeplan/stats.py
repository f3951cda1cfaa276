"""Convergence aggregation and the Wilcoxon rank-sum (Mann-Whitney) test."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.stats import norm, rankdata

EXACT_MAX_N = 12


def align_trace(best: Sequence[float], length: int) -> np.ndarray:
    """Pad a best-so-far trace to ``length`` by holding its last value."""
    arr = np.asarray(best, dtype=float)
    if len(arr) == 0:
        raise ValueError("cannot align an empty trace")
    if len(arr) >= length:
        return arr[:length]
    return np.concatenate([arr, np.full(length - len(arr), arr[-1])])


def _stack(traces: Sequence[Sequence[float]], length: int | None) -> np.ndarray:
    if not traces:
        raise ValueError("need at least one trace")
    if length is None:
        length = max(len(t) for t in traces)
    return np.vstack([align_trace(t, length) for t in traces])


def mean_convergence(traces: Sequence[Sequence[float]], length: int | None = None) -> np.ndarray:
    return _stack(traces, length).mean(axis=0)


def min_convergence(traces: Sequence[Sequence[float]], length: int | None = None) -> np.ndarray:
    return _stack(traces, length).min(axis=0)


@dataclass(frozen=True)
class RankSumResult:
    U: float
    p: float
    rank_sum: float
    exact: bool


def rank_sum_test(a: Sequence[float], b: Sequence[float]) -> RankSumResult:
    """Two-sided rank-sum test of ``a`` against ``b`` with midranks for ties.

    Exact (full enumeration of rank assignments) when the pooled size is at
    most 12, otherwise the normal approximation with tie correction and a
    continuity correction of 0.5.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na, nb = len(a), len(b)
    if na == 0 or nb == 0:
        raise ValueError("both samples must be nonempty")
    pooled = np.concatenate([a, b])
    ranks = rankdata(pooled)
    N = na + nb
    r_a = float(ranks[:na].sum())
    U = r_a - na * (na + 1) / 2
    if np.all(pooled == pooled[0]):
        return RankSumResult(U, 1.0, r_a, N <= EXACT_MAX_N)
    expected = na * (N + 1) / 2
    if N <= EXACT_MAX_N:
        dev = abs(r_a - expected) - 1e-9
        sums = [abs(sum(c) - expected) for c in combinations(ranks.tolist(), na)]
        p = sum(s >= dev for s in sums) / len(sums)
        return RankSumResult(U, float(p), r_a, True)
    _, counts = np.unique(pooled, return_counts=True)
    tie = float((counts ** 3 - counts).sum())
    var = na * nb / 12.0 * ((N + 1) - tie / (N * (N - 1)))
    mu = na * nb / 2.0
    z = max(abs(U - mu) - 0.5, 0.0) / math.sqrt(var)
    p = min(1.0, 2.0 * float(norm.sf(z)))
    return RankSumResult(U, max(p, np.finfo(float).tiny), r_a, False)
