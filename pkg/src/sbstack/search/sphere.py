"""Depth-first sphere searches."""

from __future__ import annotations

import math
from typing import Callable

from ..constellation import ConstellationSpec
from ..lattice import TriangularSystem
from .core import (
    BOUND_EPS,
    MAX_VISITS,
    BudgetExceeded,
    DecodeResult,
    Problem,
    RadiusPolicy,
    SearchStats,
    initial_radius,
)

__all__ = ["sphere_decode", "enumerate_sphere"]

ORDERS = ("pohst", "schnorr_euchner")


def _zigzag(c: float, lo: int, hi: int) -> list[int]:
    return sorted(range(lo, hi + 1), key=lambda v: (abs(v - c), v))


def _shrinking_search(prob: Problem, radius_sq: float, zigzag: bool, stats: SearchStats, max_visits: int):
    """One DFS pass; the radius drops to the cost of every leaf found."""
    n, diag = prob.n, prob.diag
    path: list[int] = []
    best = [math.inf, None]

    def descend(raw: float) -> None:
        d = len(path)
        i = n - 1 - d
        c = prob.center(i, path)
        limit = min(radius_sq, best[0])
        lo, hi = prob.interval(c, i, limit - raw)
        stats.real_mults += 2
        if lo > hi:
            return
        di = diag[i]
        dd = d + 1
        values = _zigzag(c, lo, hi) if zigzag else range(lo, hi + 1)
        for v in values:
            e = di * (c - v)
            rc = raw + e * e
            stats.nodes_generated += 1
            stats.real_mults += dd
            if rc > min(radius_sq, best[0]) + BOUND_EPS:
                if zigzag or v > c:
                    break  # metric only grows from here on
                continue
            stats.nodes_visited += 1
            if stats.nodes_visited > max_visits:
                raise BudgetExceeded(f"sphere search exceeded {max_visits} node visits")
            path.append(v)
            if dd == n:
                if rc < best[0]:
                    best[0], best[1] = rc, tuple(path)
            else:
                descend(rc)
            path.pop()

    descend(0.0)
    return best


def sphere_decode(
    system: TriangularSystem,
    policy: RadiusPolicy = RadiusPolicy(),
    alphabet: ConstellationSpec | None = None,
    *,
    order: str = "pohst",
    max_visits: int = MAX_VISITS,
) -> DecodeResult:
    """Closest point by depth-first search inside a shrinking sphere.

    Children are enumerated in natural order inside the interval
    (``order="pohst"``) or outward from the conditional optimum
    (``order="schnorr_euchner"``). An empty sphere is enlarged by
    ``policy.growth_factor`` and the search restarted.
    """
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}")
    prob = Problem(system, alphabet)
    radius_sq = initial_radius(policy, prob.system)
    stats = SearchStats()
    while True:
        cost, path = _shrinking_search(prob, radius_sq, order != "pohst", stats, max_visits)
        if path is not None:
            return DecodeResult(prob.point(path), cost, stats)
        stats.restarts += 1
        radius_sq *= policy.growth_factor


def enumerate_sphere(
    prob: Problem,
    radius_sq: float,
    on_leaf: Callable[[float, tuple], None],
    stats: SearchStats,
    max_visits: int = MAX_VISITS,
) -> None:
    """Fixed-radius depth-first walk; ``on_leaf(cost, partial)`` for every
    point inside the sphere. Costs use the tariff of :func:`sphere_decode`."""
    n, diag = prob.n, prob.diag
    path: list[int] = []

    def descend(raw: float) -> None:
        d = len(path)
        i = n - 1 - d
        c = prob.center(i, path)
        lo, hi = prob.interval(c, i, radius_sq - raw)
        stats.real_mults += 2
        if lo > hi:
            return
        di = diag[i]
        dd = d + 1
        count = hi - lo + 1
        stats.nodes_generated += count
        stats.nodes_visited += count
        stats.real_mults += count * dd
        if stats.nodes_visited > max_visits:
            raise BudgetExceeded(f"sphere enumeration exceeded {max_visits} node visits")
        for v in range(lo, hi + 1):
            e = di * (c - v)
            path.append(v)
            if dd == n:
                on_leaf(raw + e * e, tuple(path))
            else:
                descend(raw + e * e)
            path.pop()

    descend(0.0)
