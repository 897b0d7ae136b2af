"""Candidate lists and bit log-likelihood ratios.

LLR sign convention: positive means the bit is more likely a logical one.
The noise variance handed to the LLR functions is the one in the exponent
of the likelihood, ``exp(-||y - Hx||^2 / sigma^2)``, i.e. the *complex*
noise variance (twice the per-real-dimension value).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp
from scipy.stats import chi2

from .constellation import ConstellationSpec
from .lattice import TriangularSystem
from .search.core import MAX_STACK, MAX_VISITS, Problem, SearchStats
from .search.sphere import enumerate_sphere, sphere_decode
from .search.stack import best_first_leaves

__all__ = [
    "LLR_MAX",
    "CandidateList",
    "ListPolicy",
    "default_zeta",
    "list_radius",
    "list_sphere_decode",
    "llr_exact",
    "llr_maxlog",
    "llr_quantize",
    "shifted_list_decode",
    "shifted_list_radius",
    "soft_sb_stack",
    "unit_ball_volume",
]

LLR_MAX = 25.0


@dataclass(frozen=True)
class CandidateList:
    """Points (rows, real amplitudes) with their metrics, cheapest first."""

    points: np.ndarray
    costs: np.ndarray
    truncated: bool = False
    stats: SearchStats = field(default_factory=SearchStats, compare=False)

    def __len__(self) -> int:
        return len(self.costs)

    @property
    def entries(self) -> list[tuple[np.ndarray, float]]:
        return [(p, float(c)) for p, c in zip(self.points, self.costs)]

    @classmethod
    def from_pairs(cls, pairs, n: int, truncated: bool = False, stats=None) -> "CandidateList":
        pairs = sorted(pairs, key=lambda pc: (pc[1], tuple(pc[0])))
        points = np.array([p for p, _ in pairs], dtype=np.int64).reshape(len(pairs), n)
        costs = np.array([c for _, c in pairs], dtype=float)
        return cls(points, costs, truncated, stats or SearchStats())


@dataclass(frozen=True)
class ListPolicy:
    """Stop after ``size`` leaves, or admit only leaves up to ``ceiling``."""

    size: int | None = None
    ceiling: float | None = None

    def __post_init__(self):
        if (self.size is None) == (self.ceiling is None):
            raise ValueError("give exactly one of size or ceiling")
        if self.size is not None and self.size < 1:
            raise ValueError("list size must be at least 1")
        if self.ceiling is not None and not self.ceiling > 0:
            raise ValueError("cost ceiling must be positive")

    @classmethod
    def fixed_size(cls, n_p: int) -> "ListPolicy":
        return cls(size=n_p)

    @classmethod
    def cost_ceiling(cls, worst: float) -> "ListPolicy":
        return cls(ceiling=worst)


def soft_sb_stack(
    system: TriangularSystem,
    alphabet: ConstellationSpec,
    radius_sq: float,
    policy: ListPolicy,
    bias: float = 0.0,
    *,
    refill: bool = False,
    growth_factor: float = 2.0,
    max_nodes: int = MAX_STACK,
    max_visits: int = MAX_VISITS,
) -> CandidateList:
    """Candidate list from a continued SB-Stack search.

    Each leaf that reaches the top of the stack moves to the list and the
    search goes on from the nodes left in the stack. With ``bias = 0`` leaves
    arrive in nondecreasing cost order, so the list is exactly the cheapest
    points of the sphere.

    An empty sphere is always enlarged and searched again. A sphere holding
    fewer than the requested number of points yields a short list flagged
    ``truncated``, unless ``refill`` is set, in which case the radius keeps
    growing until the list is full or the sphere covers the whole alphabet.
    """
    if radius_sq <= 0:
        raise ValueError("radius_sq must be positive")
    prob = Problem(system, alphabet)
    stats = SearchStats()
    want = policy.size if policy.size is not None else math.inf
    cover = prob.max_cost()
    while True:
        limit = radius_sq if policy.ceiling is None else min(radius_sq, policy.ceiling)
        found = []
        for raw, partial in best_first_leaves(
            prob, stats, bias=bias, radius_sq=limit, max_nodes=max_nodes, max_visits=max_visits
        ):
            found.append((prob.point(partial), raw))
            if len(found) >= want:
                break
        exhausted = limit >= cover
        if policy.size is not None:
            truncated = len(found) < want and not exhausted
        else:
            # the sphere, not the ceiling, may have cut the list short
            truncated = radius_sq < policy.ceiling and not exhausted
        if found and not (truncated and refill):
            return CandidateList.from_pairs(found, prob.n, truncated=truncated, stats=stats)
        stats.restarts += 1
        radius_sq *= growth_factor


def default_zeta(n_p: int, confidence: float = 0.99) -> float:
    """``zeta`` such that ``2 zeta N_p`` is the chi-square quantile with
    ``2 N_p`` degrees of freedom."""
    return float(chi2.ppf(confidence, 2 * n_p) / (2 * n_p))


def list_radius(system: TriangularSystem, n_p: int, zeta: float | None = None) -> float:
    """``C^2 = 2 sigma^2 zeta N_p - ||y - proj_H y||^2`` (per-real-dim sigma^2).

    When the projection term would leave no positive radius it is dropped.
    """
    if zeta is None:
        zeta = default_zeta(n_p)
    if zeta <= 1:
        raise ValueError("zeta must exceed 1")
    sigma2 = system.noise_var
    if sigma2 is None or sigma2 <= 0:
        raise ValueError("the list radius needs a positive noise variance")
    base = 2.0 * sigma2 * zeta * n_p
    c2 = base - system.residual
    return c2 if c2 > 0 else base


def list_sphere_decode(
    system: TriangularSystem,
    alphabet: ConstellationSpec,
    n_p: int,
    zeta: float | None = None,
    *,
    radius_sq: float | None = None,
    growth_factor: float = 2.0,
    max_visits: int = MAX_VISITS,
) -> CandidateList:
    """List sphere decoder: fixed-radius depth-first search keeping the
    ``n_p`` cheapest points met (worst entry replaced when a cheaper one
    arrives). The radius defaults to :func:`list_radius`."""
    if n_p < 1:
        raise ValueError("n_p must be at least 1")
    if radius_sq is None:
        radius_sq = list_radius(system, n_p, zeta)
    prob = Problem(system, alphabet)
    stats = SearchStats()
    while True:
        heap: list = []  # max-heap on cost via negation
        seq = [0]

        def admit(cost: float, partial: tuple) -> None:
            seq[0] += 1
            if len(heap) < n_p:
                heapq.heappush(heap, (-cost, -seq[0], partial))
            elif cost < -heap[0][0]:
                heapq.heapreplace(heap, (-cost, -seq[0], partial))

        enumerate_sphere(prob, radius_sq, admit, stats, max_visits)
        if heap:
            pairs = [(prob.point(p), -c) for c, _, p in heap]
            return CandidateList.from_pairs(pairs, prob.n, truncated=len(heap) < n_p, stats=stats)
        stats.restarts += 1
        radius_sq *= growth_factor


def unit_ball_volume(n: int) -> float:
    return math.exp((n / 2) * math.log(math.pi) - gammaln(n / 2 + 1))


def shifted_list_radius(generator, n_p: float, expansion: float = 1.0) -> float:
    """Radius of a ball expected to hold ``n_p`` lattice points:
    ``(expansion * n_p * |det H| / V_n)^(1/n)``.

    ``expansion`` stands for the boundary and shape correction factors of
    finite constellations (1 for the infinite lattice).
    """
    h = np.atleast_2d(np.asarray(generator, dtype=float))
    n = h.shape[0]
    if h.shape != (n, n):
        raise ValueError("generator must be square")
    det = abs(np.linalg.det(h))
    if det <= 1e-300:
        raise np.linalg.LinAlgError("generator is singular")
    return (expansion * n_p * det / unit_ball_volume(n)) ** (1.0 / n)


def shifted_list_decode(
    system: TriangularSystem,
    alphabet: ConstellationSpec,
    n_p: int,
    expansion: float = 1.0,
    *,
    max_visits: int = MAX_VISITS,
) -> CandidateList:
    """Spherical list centred on the ML point instead of the received point.

    The ML point comes from :func:`sphere_decode`; then every constellation
    point within :func:`shifted_list_radius` of it (in the searched lattice)
    is listed with its true metric.
    """
    ml = sphere_decode(system, alphabet=alphabet, max_visits=max_visits)
    prob = Problem(system, alphabet)
    stats = ml.stats
    u_ml = np.array(prob.partial_of(ml.point)[::-1], dtype=float)
    centred = TriangularSystem(prob.system.r, prob.system.r @ u_ml, system.noise_var)
    shifted = Problem(centred)
    shifted.lo, shifted.hi = prob.lo, prob.hi
    radius = shifted_list_radius(prob.system.r, n_p, expansion)
    found = []
    enumerate_sphere(shifted, radius * radius, lambda c, p: found.append(p), stats, max_visits)
    r, z = prob.system.r, prob.system.z
    pairs = []
    for partial in found:
        u = np.array(partial[::-1], dtype=float)
        d = z - r @ u
        pairs.append((prob.point(partial), float(d @ d)))
    return CandidateList.from_pairs(pairs, prob.n, stats=stats)


def _hypothesis_minima(lst: CandidateList, alphabet: ConstellationSpec):
    if len(lst) == 0:
        raise ValueError("empty candidate list")
    bits = alphabet.point_bits(lst.points).astype(bool)
    costs = lst.costs[:, None]
    return bits, costs


def llr_maxlog(
    lst: CandidateList, alphabet: ConstellationSpec, noise_var: float, llr_max: float = LLR_MAX
) -> np.ndarray:
    """Max-log LLRs ``(min cost | b=0  -  min cost | b=1) / noise_var``.

    A bit whose value is the same across the whole list gets ``+-llr_max``.
    """
    bits, costs = _hypothesis_minima(lst, alphabet)
    one = np.where(bits, costs, np.inf).min(axis=0)
    zero = np.where(bits, np.inf, costs).min(axis=0)
    llr = (zero - one) / noise_var
    return np.clip(np.nan_to_num(llr, posinf=llr_max, neginf=-llr_max), -llr_max, llr_max)


def llr_exact(
    lst: CandidateList, alphabet: ConstellationSpec, noise_var: float, llr_max: float = LLR_MAX
) -> np.ndarray:
    """List-based a posteriori LLRs with log-sum-exp accumulation."""
    bits, costs = _hypothesis_minima(lst, alphabet)
    metric = -costs / noise_var
    one = logsumexp(np.where(bits, metric, -np.inf), axis=0)
    zero = logsumexp(np.where(bits, -np.inf, metric), axis=0)
    llr = one - zero
    return np.clip(np.nan_to_num(llr, posinf=llr_max, neginf=-llr_max), -llr_max, llr_max)


def llr_quantize(llr, m: int, llr_max: float = LLR_MAX) -> np.ndarray:
    """Round onto ``2^m - 1`` uniform levels spanning ``[-llr_max, llr_max]``.

    Zero is a level; ``m = 1`` would leave only that level and is rejected.
    """
    if m < 2:
        raise ValueError("m must be at least 2 (2^m - 1 levels)")
    half = 2 ** (m - 1) - 1
    step = llr_max / half
    v = np.clip(np.asarray(llr, dtype=float), -llr_max, llr_max) / step
    k = np.sign(v) * np.floor(np.abs(v) + 0.5)
    return np.clip(k, -half, half) * step
