"""Best-first (stack) tree searches.

All variants share one loop: pop the cheapest node, generate its children,
push them, repeat until a full-length path reaches the top. They differ in
which children a node has:

* ``stack_decode``: every constellation symbol (classical stack; with a cap
  K it becomes the K-best stack).
* ``sb_stack_decode``: the integers inside the sphere interval around the
  conditional optimum, computed from a radius that never shrinks.
* ``neighbor_stack_decode``: a fixed box ``u - t .. u + t`` around the
  Babai point ``u``.
"""

from __future__ import annotations

import heapq
from typing import Iterator

import numpy as np

from ..constellation import ConstellationSpec
from ..lattice import TriangularSystem, babai_point
from .core import (
    MAX_STACK,
    MAX_VISITS,
    BudgetExceeded,
    DecodeResult,
    Problem,
    RadiusPolicy,
    SearchNode,
    SearchRegionSpec,
    SearchStats,
    initial_radius,
)

__all__ = [
    "NodeStack",
    "best_first_leaves",
    "neighbor_stack_decode",
    "sb_stack_decode",
    "stack_decode",
]


class NodeStack:
    """Cost-ordered node store; ties leave in insertion order.

    Entries are ``(cost, seq, raw_cost, partial)`` tuples.
    """

    def __init__(self, cap: int | None = None, max_nodes: int = MAX_STACK):
        if cap is not None and cap < 1:
            raise ValueError("stack cap must be at least 1")
        self.cap = cap
        self.max_nodes = max_nodes
        self._heap: list = []
        self._seq = 0

    def __len__(self) -> int:
        return len(self._heap)

    def __bool__(self) -> bool:
        return bool(self._heap)

    def push(self, cost: float, raw: float, partial: tuple) -> None:
        heapq.heappush(self._heap, (cost, self._seq, raw, partial))
        self._seq += 1

    def pop(self) -> tuple:
        return heapq.heappop(self._heap)

    def top(self) -> tuple:
        return self._heap[0]

    def top_node(self, n: int) -> SearchNode:
        """The top entry as a :class:`SearchNode` of an n-dimensional tree."""
        cost, seq, raw, partial = self._heap[0]
        return SearchNode(n + 1 - len(partial), partial, cost, raw, seq)

    def settle(self) -> None:
        """Apply the cap (keep the K best) or enforce the memory limit."""
        if self.cap is not None:
            if len(self._heap) > self.cap:
                self._heap = heapq.nsmallest(self.cap, self._heap)
        elif len(self._heap) > self.max_nodes:
            raise BudgetExceeded(f"stack grew beyond {self.max_nodes} nodes")


def best_first_leaves(
    prob: Problem,
    stats: SearchStats,
    *,
    bias: float = 0.0,
    radius_sq: float | None = None,
    region: tuple[list[int], list[int]] | None = None,
    cap: int | None = None,
    max_nodes: int = MAX_STACK,
    max_visits: int = MAX_VISITS,
) -> Iterator[tuple[float, tuple]]:
    """Yield ``(raw_cost, partial)`` for each leaf in the order it tops the stack.

    Children come from the sphere interval when ``radius_sq`` is given, from
    ``region = (lows, highs)`` (per 0-based component) when that is given,
    otherwise from the full box of the alphabet.
    """
    n, diag, center = prob.n, prob.diag, prob.center
    if radius_sq is None and region is None and prob.lo is None:
        raise ValueError("an unbounded search needs a radius or a region")
    stack = NodeStack(cap, max_nodes)
    push = stack.push
    stack.push(0.0, 0.0, ())
    while stack:
        _, _, raw, partial = stack.pop()
        d = len(partial)
        if d:
            stats.nodes_visited += 1
            if stats.nodes_visited > max_visits:
                raise BudgetExceeded(f"stack search exceeded {max_visits} node visits")
        if d == n:
            yield raw, partial
            continue
        i = n - 1 - d
        c = center(i, partial)
        if radius_sq is not None:
            lo, hi = prob.interval(c, i, radius_sq - raw)
            stats.real_mults += 2
        elif region is not None:
            lo, hi = region[0][i], region[1][i]
        else:
            lo, hi = prob.lo, prob.hi
        if lo > hi:
            continue  # dead end: no child inside the search region
        di = diag[i]
        dd = d + 1
        penalty = bias * dd
        for v in range(lo, hi + 1):
            e = di * (c - v)
            rc = raw + e * e
            push(rc - penalty, rc, partial + (v,))
        k = hi - lo + 1
        stats.nodes_generated += k
        stats.real_mults += k * dd
        stack.settle()


def sb_stack_decode(
    system: TriangularSystem,
    policy: RadiusPolicy = RadiusPolicy(),
    bias: float = 0.0,
    alphabet: ConstellationSpec | None = None,
    *,
    max_nodes: int = MAX_STACK,
    max_visits: int = MAX_VISITS,
) -> DecodeResult:
    """Spherical-bound stack decoder.

    Best-first search whose children are confined to the sphere of the
    initial radius; the radius stays fixed. If the sphere holds no point the
    radius grows by ``policy.growth_factor`` and the search restarts. With
    ``bias = 0`` the result is the ML point; a positive bias favours deeper
    nodes and trades optimality for fewer visits. ``cost`` in the result is
    always the unbiased metric.
    """
    if bias < 0:
        raise ValueError("bias must be nonnegative")
    prob = Problem(system, alphabet)
    radius_sq = initial_radius(policy, prob.system)
    stats = SearchStats()
    while True:
        for raw, partial in best_first_leaves(
            prob, stats, bias=bias, radius_sq=radius_sq, max_nodes=max_nodes, max_visits=max_visits
        ):
            return DecodeResult(prob.point(partial), raw, stats)
        stats.restarts += 1
        radius_sq *= policy.growth_factor


def stack_decode(
    system: TriangularSystem,
    alphabet: ConstellationSpec,
    bias: float = 0.0,
    cap: int | None = None,
    *,
    max_nodes: int = MAX_STACK,
    max_visits: int = MAX_VISITS,
) -> DecodeResult:
    """Classical stack decoder over the full sqrt(q)-ary tree.

    With ``cap = K`` only the K cheapest nodes survive each expansion (K-best
    stack, sub-optimal).
    """
    if alphabet is None:
        raise ValueError("the classical stack decoder needs a finite alphabet")
    prob = Problem(system, alphabet)
    stats = SearchStats()
    for raw, partial in best_first_leaves(
        prob, stats, bias=bias, cap=cap, max_nodes=max_nodes, max_visits=max_visits
    ):
        return DecodeResult(prob.point(partial), raw, stats)
    raise AssertionError("a finite full tree always has a leaf")  # pragma: no cover


def neighbor_stack_decode(
    system: TriangularSystem,
    region: SearchRegionSpec | int,
    bias: float = 0.0,
    alphabet: ConstellationSpec | None = None,
    *,
    max_nodes: int = MAX_STACK,
    max_visits: int = MAX_VISITS,
) -> DecodeResult:
    """Best-first search over the box ``u - t .. u + t`` around the Babai point.

    Coordinates are integers of the searched lattice (amplitude indices when
    an alphabet is given, in which case the box is also clipped to it).
    Sub-optimal whenever the ML point falls outside the box.
    """
    prob = Problem(system, alphabet)
    n = prob.n
    if isinstance(region, (int, np.integer)):
        region = SearchRegionSpec.uniform(int(region), n)
    if len(region.t) != n:
        raise ValueError(f"region has {len(region.t)} half-widths for dimension {n}")
    if alphabet is not None:
        u = alphabet.to_shifted(babai_point(system, alphabet))
    else:
        u = babai_point(system)
    lows = [int(u[i]) - region.t[i] for i in range(n)]
    highs = [int(u[i]) + region.t[i] for i in range(n)]
    if prob.lo is not None:
        lows = [max(v, prob.lo) for v in lows]
        highs = [min(v, prob.hi) for v in highs]
    stats = SearchStats()
    for raw, partial in best_first_leaves(
        prob, stats, bias=bias, region=(lows, highs), max_nodes=max_nodes, max_visits=max_visits
    ):
        return DecodeResult(prob.point(partial), raw, stats)
    raise AssertionError("a nonempty box always has a leaf")  # pragma: no cover
