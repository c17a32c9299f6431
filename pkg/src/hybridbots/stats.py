"""Rank-sum test and box-plot summaries for comparing score cohorts."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from itertools import combinations
from typing import Sequence

import numpy as np

EXACT_MAX_N = 8


class EmptySample(ValueError):
    pass


class EmptyInput(ValueError):
    pass


@dataclass(frozen=True)
class RankSumResult:
    u: float
    p: float
    method: str  # "exact" or "normal"

    def to_dict(self) -> dict:
        return {"U": self.u, "p": self.p, "method": self.method}


@dataclass(frozen=True)
class BoxSummary:
    min: float
    q1: float
    median: float
    q3: float
    max: float
    n: int
    mean: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.min, self.q1, self.median, self.q3, self.max)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "min": self.min,
            "q1": self.q1,
            "median": self.median,
            "q3": self.q3,
            "max": self.max,
            "mean": self.mean,
        }


def midranks(values: Sequence[float]) -> list[float]:
    """1-based ranks with ties sharing the average rank."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        r = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = r
        i = j + 1
    return ranks


def _u_from_ranks(rank_sum: float, n_a: int) -> float:
    return rank_sum - n_a * (n_a + 1) / 2


def exact_u_distribution(pooled_ranks: Sequence[float], n_a: int) -> Counter:
    """Permutation distribution of U for the first sample, in doubled units.

    Keys are ``2 * U`` (integers even with midranks); values are counts over
    all ``C(n, n_a)`` equally likely assignments of ranks to sample a.
    """
    doubled = [round(2 * r) for r in pooled_ranks]
    offset = n_a * (n_a + 1)
    dist: Counter = Counter()
    for idx in combinations(range(len(doubled)), n_a):
        dist[sum(doubled[i] for i in idx) - offset] += 1
    return dist


def _exact_p(u: float, dist: Counter) -> float:
    u2 = round(2 * u)
    total = sum(dist.values())
    le = sum(c for k, c in dist.items() if k <= u2)
    ge = sum(c for k, c in dist.items() if k >= u2)
    return min(1.0, 2 * min(le, ge) / total)


def _normal_p(u: float, n_a: int, n_b: int, pooled: Sequence[float]) -> float:
    n = n_a + n_b
    mu = n_a * n_b / 2
    ties = sum(t**3 - t for t in Counter(pooled).values())
    var = n_a * n_b / 12 * ((n + 1) - ties / (n * (n - 1)))
    if var <= 0:
        return 1.0
    z = max(abs(u - mu) - 0.5, 0.0) / math.sqrt(var)
    return min(1.0, math.erfc(z / math.sqrt(2)))


def rank_sum_test(sample_a: Sequence[float], sample_b: Sequence[float], method: str = "auto") -> RankSumResult:
    """Two-sided Mann-Whitney U test; U is reported for ``sample_a``.

    ``auto`` enumerates the exact permutation distribution (ties handled by
    midranks) when both samples have at most 8 values, and otherwise uses the
    normal approximation with tie and continuity corrections.
    """
    a = [float(x) for x in sample_a]
    b = [float(x) for x in sample_b]
    if not a or not b:
        raise EmptySample("both samples need at least one value")
    if method not in ("auto", "exact", "normal"):
        raise ValueError(f"unknown method {method!r}")
    pooled = a + b
    ranks = midranks(pooled)
    u = _u_from_ranks(sum(ranks[: len(a)]), len(a))
    if method == "auto":
        method = "exact" if max(len(a), len(b)) <= EXACT_MAX_N else "normal"
    if method == "exact":
        p = _exact_p(u, exact_u_distribution(ranks, len(a)))
    else:
        p = _normal_p(u, len(a), len(b), pooled)
    return RankSumResult(u=u, p=p, method=method)


def summarize_box(values: Sequence[float]) -> BoxSummary:
    """Five-number summary; quartiles interpolate linearly between closest ranks."""
    x = np.asarray(list(values), dtype=float)
    if x.size == 0:
        raise EmptyInput("summarize_box needs at least one value")
    q = np.percentile(x, [0, 25, 50, 75, 100], method="linear")
    return BoxSummary(*(float(v) for v in q), n=int(x.size), mean=float(x.mean()))


def fixture_bot_scores() -> list[float]:
    """Aggregate scores of a 27-account hybrid network, shipped as fixture data."""
    text = resources.files("hybridbots.data").joinpath("bot_scores_fixture.csv").read_text(encoding="utf-8")
    rows = [ln.split(",") for ln in text.splitlines()[1:] if ln.strip()]
    return [float(r[1]) for r in rows]
