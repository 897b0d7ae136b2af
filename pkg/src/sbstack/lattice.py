"""Real lattice models of MIMO channels and the reference decoders.

Complex spatial-multiplexing and square space-time-block-coded systems are
turned into a real system ``y = H x + w``; a QR reduction then gives the
triangular problem ``min ||z - R x||^2`` every tree search works on.

Noise convention: ``noise_var`` is always the variance per *real*
dimension, i.e. half the complex noise variance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import solve_triangular

from .constellation import ConstellationSpec, round_half_away

__all__ = [
    "ComplexChannel",
    "RealLatticeSystem",
    "StbcGenerator",
    "TriangularSystem",
    "realify",
    "realify_matrix",
    "stbc_flatten",
    "qr_reduce",
    "shift_system",
    "zf_point",
    "babai_point",
    "brute_force_ml",
    "EnumerationBudgetExceeded",
]

ML_BUDGET = 2**24


class EnumerationBudgetExceeded(RuntimeError):
    pass


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ComplexChannel:
    """N x M complex fading matrix (rows: receive antennas)."""

    entries: np.ndarray

    def __post_init__(self):
        h = np.atleast_2d(np.asarray(self.entries, dtype=complex))
        if h.ndim != 2:
            raise ValueError("channel entries must be a 2-D matrix")
        object.__setattr__(self, "entries", _frozen(h, complex))

    @property
    def num_tx(self) -> int:
        return self.entries.shape[1]

    @property
    def num_rx(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class RealLatticeSystem:
    generator: np.ndarray
    received: np.ndarray
    noise_var: float | None = None

    def __post_init__(self):
        g = np.atleast_2d(self.generator)
        y = np.ravel(self.received)
        if g.shape[0] != y.size:
            raise ValueError(
                f"generator has {g.shape[0]} rows but received has length {y.size}"
            )
        object.__setattr__(self, "generator", _frozen(g))
        object.__setattr__(self, "received", _frozen(y))

    @property
    def dimension(self) -> int:
        return self.generator.shape[1]


@dataclass(frozen=True)
class StbcGenerator:
    """Linear square STBC: ``vec(C) = phi @ x`` with ``phi`` unitary (MT x MT)."""

    phi: np.ndarray
    temporal_length: int

    def __post_init__(self):
        phi = np.atleast_2d(np.asarray(self.phi, dtype=complex))
        side = phi.shape[0]
        if phi.shape != (side, side) or side % self.temporal_length:
            raise ValueError("phi must be square with side M*T")
        if not np.allclose(phi.conj().T @ phi, np.eye(side), atol=1e-9, rtol=0):
            raise ValueError("phi is not unitary within 1e-9")
        object.__setattr__(self, "phi", _frozen(phi, complex))

    @property
    def num_tx(self) -> int:
        return self.phi.shape[0] // self.temporal_length

    @classmethod
    def identity(cls, m: int) -> "StbcGenerator":
        """Uncoded M x M transmission seen as a trivial square code."""
        return cls(np.eye(m * m), m)

    @classmethod
    def golden(cls) -> "StbcGenerator":
        """The 2x2 Golden code, columns of the codeword stacked (vec)."""
        theta = (1 + np.sqrt(5)) / 2
        theta_b = (1 - np.sqrt(5)) / 2
        a = 1 + 1j - 1j * theta
        a_b = 1 + 1j - 1j * theta_b
        phi = np.array(
            [
                [a, a * theta, 0, 0],
                [0, 0, 1j * a_b, 1j * a_b * theta_b],
                [0, 0, a, a * theta],
                [a_b, a_b * theta_b, 0, 0],
            ]
        ) / np.sqrt(5)
        return cls(phi, 2)


@dataclass(frozen=True)
class TriangularSystem:
    """Reduced problem ``min ||z - R x||^2`` with R upper triangular.

    ``residual`` is the part of ``||y||^2`` outside the column space of the
    generator, so that ``||y - H x||^2 = ||z - R x||^2 + residual``.
    """

    r: np.ndarray
    z: np.ndarray
    noise_var: float | None = None
    residual: float = 0.0

    def __post_init__(self):
        r = np.atleast_2d(self.r)
        z = np.ravel(self.z)
        n = r.shape[0]
        if r.shape != (n, n) or z.size != n:
            raise ValueError("R must be n x n and z of length n")
        if np.any(np.tril(r, -1) != 0):
            raise ValueError("R is not upper triangular")
        if np.any(np.diag(r) <= 0):
            raise ValueError("R must have a strictly positive diagonal")
        object.__setattr__(self, "r", _frozen(r))
        object.__setattr__(self, "z", _frozen(z))

    @property
    def dimension(self) -> int:
        return self.r.shape[0]

    def metric(self, x) -> float:
        d = self.z - self.r @ np.asarray(x, dtype=float)
        return float(d @ d)


def realify_matrix(h) -> np.ndarray:
    """``[[Re h, -Im h], [Im h, Re h]]``."""
    h = np.asarray(h, dtype=complex)
    return np.block([[h.real, -h.imag], [h.imag, h.real]])


def realify(
    channel: ComplexChannel, received=None, noise_var: float | None = None
) -> RealLatticeSystem:
    """Real-valued equivalent of ``y = H x + w`` for spatial multiplexing."""
    if received is None:
        received = np.zeros(channel.num_rx, dtype=complex)
    y = np.ravel(np.asarray(received, dtype=complex))
    if y.size != channel.num_rx:
        raise ValueError(
            f"received has length {y.size}, channel has {channel.num_rx} rows"
        )
    return RealLatticeSystem(
        realify_matrix(channel.entries), np.concatenate([y.real, y.imag]), noise_var
    )


def stbc_flatten(
    channel: ComplexChannel,
    code: StbcGenerator,
    received=None,
    noise_var: float | None = None,
) -> RealLatticeSystem:
    """Real system of dimension 2*M^2 for a square code on an M x M channel.

    ``received`` is the N x T matrix ``Y``; it is vectorised column by column
    (one column per channel use), matching ``vec(H C) = blockdiag(H) vec(C)``.
    """
    m, nr = channel.num_tx, channel.num_rx
    t = code.temporal_length
    if m != nr:
        raise ValueError("STBC flattening needs a square system (M = N)")
    if t != m:
        raise ValueError("only square codes (T = M) are supported")
    if code.phi.shape[0] != m * t:
        raise ValueError(f"phi side {code.phi.shape[0]} != M*T = {m * t}")
    gen_c = np.kron(np.eye(t), channel.entries) @ code.phi
    if received is None:
        y = np.zeros(nr * t, dtype=complex)
    else:
        y = np.asarray(received, dtype=complex)
        if y.shape != (nr, t):
            raise ValueError(f"received must be {nr} x {t}")
        y = y.ravel(order="F")
    return RealLatticeSystem(
        realify_matrix(gen_c), np.concatenate([y.real, y.imag]), noise_var
    )


def qr_reduce(system: RealLatticeSystem, tol: float = 1e-10, return_q: bool = False):
    """Householder QR (LAPACK) with the diagonal of R made positive.

    Returns the :class:`TriangularSystem`, or ``(system, Q)`` with ``return_q``.
    """
    h = system.generator
    if h.shape[0] < h.shape[1] or np.linalg.matrix_rank(h, tol=tol) < h.shape[1]:
        raise np.linalg.LinAlgError("generator is rank deficient")
    q, r = np.linalg.qr(h, mode="reduced")
    signs = np.where(np.diag(r) < 0, -1.0, 1.0)
    q = q * signs
    r = np.triu(r * signs[:, None])
    z = q.T @ system.received
    residual = max(float(system.received @ system.received - z @ z), 0.0)
    tri = TriangularSystem(r, z, system.noise_var, residual)
    return (tri, q) if return_q else tri


def shift_system(system: TriangularSystem, alphabet: ConstellationSpec) -> TriangularSystem:
    """Rewrite the problem in amplitude indices ``u = (x + s - 1) / 2``.

    Since ``x = 2u - (s - 1)``, ``||z - R x|| = ||(z + (s-1) R 1) - 2R u||``;
    every cost is unchanged.
    """
    s = alphabet.side
    r = system.r
    z = system.z + (s - 1) * r.sum(axis=1)
    return TriangularSystem(2.0 * r, z, system.noise_var, system.residual)


def zf_point(system: TriangularSystem) -> np.ndarray:
    """Unconstrained solution of ``R rho = z``."""
    return solve_triangular(system.r, system.z, lower=False)


def babai_point(system: TriangularSystem, alphabet: ConstellationSpec | None = None) -> np.ndarray:
    """ZF-DFE point: successive rounding from the last component down."""
    r, z = system.r, system.z
    n = system.dimension
    x = np.zeros(n, dtype=np.int64)
    for i in range(n - 1, -1, -1):
        c = (z[i] - r[i, i + 1 :] @ x[i + 1 :]) / r[i, i]
        x[i] = alphabet.nearest(c) if alphabet is not None else round_half_away(c)
    return x


@lru_cache(maxsize=16)
def _all_points(q: int, n: int) -> np.ndarray:
    symbols = ConstellationSpec(q).symbols
    pts = np.array(list(itertools.product(symbols, repeat=n)), dtype=float).T
    pts.setflags(write=False)
    return pts


def brute_force_ml(
    system: TriangularSystem, alphabet: ConstellationSpec, budget: int = ML_BUDGET
) -> tuple[np.ndarray, float]:
    """Exhaustive ML over ``alphabet^n``; ties go to the lexicographically smallest."""
    n = system.dimension
    if alphabet.side**n > budget:
        raise EnumerationBudgetExceeded(
            f"{alphabet.side}^{n} candidates exceed the budget of {budget}"
        )
    pts = _all_points(alphabet.q, n)
    d = system.z[:, None] - system.r @ pts
    costs = np.einsum("ij,ij->j", d, d)
    k = int(np.argmin(costs))
    return pts[:, k].astype(np.int64), float(costs[k])
