"""Shared machinery of the tree searches: nodes, bounds, radii, counters.

Levels follow the usual lattice-decoding convention: component ``x_k`` is
decided at level ``k`` (1-based), the root sits at level ``n + 1`` and a
leaf at level 1. A node's ``partial`` holds ``(x_n, ..., x_k)``.

Multiplication tariff (shared by every decoder so counts are comparable):
evaluating the branch metric of a child at level ``i`` costs ``n - i + 1``
real multiplications, one interval computation costs 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from operator import mul
from typing import NamedTuple

import numpy as np

from ..constellation import ConstellationSpec
from ..lattice import TriangularSystem, shift_system

__all__ = [
    "BOUND_EPS",
    "Bounds",
    "BudgetExceeded",
    "DecodeResult",
    "RadiusPolicy",
    "SearchNode",
    "SearchRegionSpec",
    "SearchStats",
    "child_node",
    "clamp_bounds",
    "initial_radius",
    "level_bounds",
    "node_cost",
]

# slack on interval ends so that points lying exactly on the sphere survive
# floating-point rounding of the centre
BOUND_EPS = 1e-9

MAX_VISITS = 10**8
MAX_STACK = 10**6


class BudgetExceeded(RuntimeError):
    """A search ran past its node-visit or stack-size budget."""


@dataclass
class SearchStats:
    nodes_generated: int = 0
    nodes_visited: int = 0
    real_mults: int = 0
    restarts: int = 0

    def __iadd__(self, other: "SearchStats") -> "SearchStats":
        self.nodes_generated += other.nodes_generated
        self.nodes_visited += other.nodes_visited
        self.real_mults += other.real_mults
        self.restarts += other.restarts
        return self


class DecodeResult(NamedTuple):
    point: np.ndarray
    cost: float
    stats: SearchStats


RADIUS_KINDS = ("fixed", "noise_scaled", "noise_and_fading")


@dataclass(frozen=True)
class RadiusPolicy:
    """How the initial squared radius C^2 is chosen.

    * ``fixed``: ``radius_sq`` as given.
    * ``noise_scaled``: ``2 n sigma^2``.
    * ``noise_and_fading``: ``min(2 n sigma^2, min diag(H^T H))``.
    """

    kind: str = "noise_and_fading"
    radius_sq: float | None = None
    growth_factor: float = 2.0

    def __post_init__(self):
        if self.kind not in RADIUS_KINDS:
            raise ValueError(f"unknown radius policy {self.kind!r}")
        if self.kind == "fixed" and not (self.radius_sq and self.radius_sq > 0):
            raise ValueError("fixed radius policy needs radius_sq > 0")
        if self.growth_factor <= 1:
            raise ValueError("growth_factor must exceed 1")

    @classmethod
    def fixed(cls, radius_sq: float, growth_factor: float = 2.0) -> "RadiusPolicy":
        return cls("fixed", radius_sq, growth_factor)


@dataclass(frozen=True)
class SearchRegionSpec:
    """Per-level half-widths ``t`` of the box around the Babai point."""

    t: tuple[int, ...]

    def __post_init__(self):
        t = tuple(int(v) for v in self.t)
        if any(v < 0 for v in t):
            raise ValueError("region half-widths must be nonnegative")
        object.__setattr__(self, "t", t)

    @classmethod
    def uniform(cls, t: int, n: int) -> "SearchRegionSpec":
        return cls((t,) * n)


@dataclass(frozen=True)
class SearchNode:
    level: int
    partial: tuple[int, ...] = ()
    cost: float = 0.0
    raw_cost: float = 0.0
    seq: int = field(default=0, compare=False)

    @classmethod
    def root(cls, n: int) -> "SearchNode":
        return cls(level=n + 1)

    @property
    def depth(self) -> int:
        return len(self.partial)


class Bounds(NamedTuple):
    lo: int
    hi: int

    @property
    def empty(self) -> bool:
        return self.lo > self.hi

    def __len__(self) -> int:
        return max(self.hi - self.lo + 1, 0)


def _center(system: TriangularSystem, node: SearchNode) -> tuple[int, float]:
    """Index of the next component and its unconstrained optimum."""
    n = system.dimension
    i = node.level - 2  # 0-based index of the component decided by children
    if i < 0:
        raise ValueError("a leaf has no children")
    r, z = system.r, system.z
    decided = np.array(node.partial[::-1], dtype=float)  # x_{i+1}, ..., x_{n-1}
    s = z[i] - r[i, i + 1 : n] @ decided
    return i, s / r[i, i]


def child_node(
    parent: SearchNode, symbol: int, system: TriangularSystem, bias: float = 0.0, seq: int = 0
) -> SearchNode:
    """Extend ``parent`` by ``symbol`` for the next component.

    ``raw_cost`` accumulates the branch metrics
    ``|z_i - sum_{j>=i} r_ij x_j|^2``; ``cost`` subtracts ``bias`` per
    decided component.
    """
    i, c = _center(system, parent)
    f = (system.r[i, i] * (c - symbol)) ** 2
    raw = parent.raw_cost + f
    depth = parent.depth + 1
    return SearchNode(parent.level - 1, parent.partial + (symbol,), raw - bias * depth, raw, seq)


def node_cost(parent: SearchNode, symbol: int, system: TriangularSystem, bias: float = 0.0) -> float:
    return child_node(parent, symbol, system, bias).cost


def _interval(center: float, half_width: float) -> Bounds:
    return Bounds(
        math.ceil(center - half_width - BOUND_EPS), math.floor(center + half_width + BOUND_EPS)
    )


def level_bounds(node: SearchNode, system: TriangularSystem, radius_sq: float) -> Bounds:
    """Integer interval of children of ``node`` that stay inside the sphere.

    With ``T = C^2 - raw_cost`` and ``S`` the conditional optimum of the next
    component, the admissible values are ``ceil(S - sqrt(T / r_ii^2))`` to
    ``floor(S + sqrt(T / r_ii^2))``. An empty interval has ``lo > hi``.
    """
    i, s = _center(system, node)
    t = radius_sq - node.raw_cost
    assert t >= -BOUND_EPS, "node lies outside the sphere"
    return _interval(s, math.sqrt(max(t, 0.0)) / system.r[i, i])


def clamp_bounds(bounds: Bounds, alphabet: ConstellationSpec) -> Bounds:
    """Intersect shifted-coordinate bounds with ``[0, sqrt(q) - 1]``."""
    return Bounds(max(bounds.lo, 0), min(bounds.hi, alphabet.side - 1))


def initial_radius(
    policy: RadiusPolicy, system: TriangularSystem, generator: np.ndarray | None = None
) -> float:
    """Initial squared radius. Without ``generator``, ``diag(H^T H)`` is read
    off ``R`` (column norms are preserved by the QR reduction)."""
    if policy.kind == "fixed":
        return float(policy.radius_sq)
    sigma2 = system.noise_var
    if sigma2 is None or sigma2 <= 0:
        raise ValueError(f"radius policy {policy.kind!r} needs a positive noise variance")
    c2 = 2.0 * system.dimension * sigma2
    if policy.kind == "noise_and_fading":
        g = system.r if generator is None else np.asarray(generator)
        c2 = min(c2, float(np.min(np.einsum("ij,ij->j", g, g))))
    return c2


class Problem:
    """A triangular system prepared for fast scalar searches.

    With an alphabet, the system is moved to amplitude indices and a box
    ``[0, sqrt(q) - 1]`` applies at every level; without one, the search runs
    over all of Z^n.
    """

    __slots__ = ("n", "system", "alphabet", "z", "diag", "rrow", "lo", "hi")

    def __init__(self, system: TriangularSystem, alphabet: ConstellationSpec | None = None):
        self.alphabet = alphabet
        if alphabet is not None:
            system = shift_system(system, alphabet)
            self.lo, self.hi = 0, alphabet.side - 1
        else:
            self.lo = self.hi = None
        self.system = system
        n = self.n = system.dimension
        r = system.r
        self.z = [float(v) for v in system.z]
        self.diag = [float(r[i, i]) for i in range(n)]
        # rrow[i][k] = r[i, n-1-k], so zip with a partial (x_n, x_{n-1}, ...)
        self.rrow = [[float(v) for v in r[i, ::-1]] for i in range(n)]

    def center(self, i: int, partial) -> float:
        return (self.z[i] - sum(map(mul, self.rrow[i], partial))) / self.diag[i]

    def interval(self, c: float, i: int, budget: float) -> tuple[int, int]:
        w = math.sqrt(budget) / self.diag[i] if budget > 0 else 0.0
        lo = math.ceil(c - w - BOUND_EPS)
        hi = math.floor(c + w + BOUND_EPS)
        if self.lo is not None:
            lo = max(lo, self.lo)
            hi = min(hi, self.hi)
        return lo, hi

    def point(self, partial) -> np.ndarray:
        u = np.array(partial[::-1], dtype=np.int64)
        return self.alphabet.from_shifted(u) if self.alphabet is not None else u

    def partial_of(self, x) -> tuple[int, ...]:
        x = np.asarray(x, dtype=np.int64)
        if self.alphabet is not None:
            x = self.alphabet.to_shifted(x)
        return tuple(int(v) for v in x[::-1])

    def max_cost(self) -> float:
        """An upper bound on the metric of any point of the box."""
        if self.lo is None:
            return math.inf
        r = np.abs(self.system.r)
        worst = np.abs(self.system.z) + r.sum(axis=1) * max(abs(self.lo), abs(self.hi))
        return float(worst @ worst)
