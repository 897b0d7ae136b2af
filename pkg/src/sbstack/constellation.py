"""Square QAM alphabets with reflected-Gray labelling.

Decoders work with the integer amplitudes {-(s-1), ..., -1, +1, ..., s-1}
per real dimension (s = sqrt(q)). The shift ``u = (x + s - 1) / 2`` maps them
onto {0, ..., s-1}, which is the coordinate system the tree searches use.

Bit layout of a real point ``x`` of length ``n = 2K`` (K complex symbols,
real parts first then imaginary parts, as produced by realification): for
each complex symbol k the B/2 bits of ``x[k]`` (in-phase) are followed by the
B/2 bits of ``x[K + k]`` (quadrature), symbols in order k = 0..K-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = ["ConstellationSpec", "qam_map", "qam_demap_bits"]


def _gray(i: int) -> int:
    return i ^ (i >> 1)


@dataclass(frozen=True)
class ConstellationSpec:
    """A q-QAM alphabet, q an even power of two (4, 16, 64, ...)."""

    q: int

    def __post_init__(self):
        side = math.isqrt(self.q)
        if self.q < 4 or side * side != self.q or side & (side - 1):
            raise ValueError(f"q must be 4, 16, 64, ...; got {self.q}")

    @property
    def side(self) -> int:
        """Number of amplitude levels per real dimension (sqrt(q))."""
        return math.isqrt(self.q)

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.q))

    @property
    def bits_per_dim(self) -> int:
        return self.bits_per_symbol // 2

    @cached_property
    def symbols(self) -> np.ndarray:
        """Real amplitudes in ascending order."""
        return np.arange(-(self.side - 1), self.side, 2, dtype=np.int64)

    @property
    def energy(self) -> float:
        """Average energy of a complex symbol in integer coordinates."""
        return 2.0 * (self.q - 1) / 3.0

    @cached_property
    def gray_table(self) -> np.ndarray:
        """``gray_table[u]`` is the bit pattern (MSB first) of amplitude index u."""
        m = self.bits_per_dim
        table = np.zeros((self.side, m), dtype=np.int8)
        for u in range(self.side):
            g = _gray(u)
            table[u] = [(g >> (m - 1 - k)) & 1 for k in range(m)]
        return table

    @cached_property
    def _index_of_pattern(self) -> np.ndarray:
        m = self.bits_per_dim
        weights = 1 << np.arange(m - 1, -1, -1)
        codes = self.gray_table.astype(np.int64) @ weights
        inv = np.empty(self.side, dtype=np.int64)
        inv[codes] = np.arange(self.side)
        return inv

    def to_shifted(self, x):
        """Amplitudes -> indices in {0, ..., side-1}."""
        return (np.asarray(x) + self.side - 1) // 2

    def from_shifted(self, u):
        """Indices -> amplitudes."""
        return 2 * np.asarray(u, dtype=np.int64) - (self.side - 1)

    def nearest(self, value: float) -> int:
        """Closest alphabet amplitude to a real value (ties away from zero)."""
        u = round_half_away((value + self.side - 1) / 2.0)
        u = min(max(u, 0), self.side - 1)
        return 2 * u - (self.side - 1)

    def contains(self, x) -> bool:
        x = np.asarray(x)
        return bool(np.all((np.abs(x) <= self.side - 1) & (x % 2 == 1)))

    def point_bits(self, points) -> np.ndarray:
        """Gray bits of real points; accepts one point (n,) or a stack (L, n).

        Amplitudes outside the alphabet are clamped to the nearest edge level
        before labelling.
        """
        pts = np.asarray(points)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        n = pts.shape[1]
        if n % 2:
            raise ValueError("real point length must be even (I then Q halves)")
        k = n // 2
        u = np.clip(self.to_shifted(pts.astype(np.int64)), 0, self.side - 1)
        # (L, K, 2) -> per symbol: I bits then Q bits
        iq = np.stack([u[:, :k], u[:, k:]], axis=2)
        bits = self.gray_table[iq].reshape(pts.shape[0], k * self.bits_per_symbol)
        return bits[0] if single else bits

    def bits_to_point(self, bits) -> np.ndarray:
        """Inverse of :meth:`point_bits` for a single point."""
        bits = np.asarray(bits, dtype=np.int64).ravel()
        B = self.bits_per_symbol
        if bits.size % B:
            raise ValueError(f"bit count {bits.size} not a multiple of {B}")
        k = bits.size // B
        m = self.bits_per_dim
        weights = 1 << np.arange(m - 1, -1, -1)
        codes = bits.reshape(k, 2, m) @ weights
        u = self._index_of_pattern[codes]
        x = self.from_shifted(u)
        return np.concatenate([x[:, 0], x[:, 1]])


def round_half_away(v: float) -> int:
    return int(math.floor(v + 0.5)) if v >= 0 else -int(math.floor(-v + 0.5))


def qam_map(bits, alphabet: ConstellationSpec) -> np.ndarray:
    """Map a bit sequence to complex symbols (integer coordinates)."""
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if bits.size % alphabet.bits_per_symbol:
        raise ValueError(
            f"bit count {bits.size} not a multiple of {alphabet.bits_per_symbol}"
        )
    x = alphabet.bits_to_point(bits)
    k = x.size // 2
    return x[:k] + 1j * x[k:]


def qam_demap_bits(symbols, alphabet: ConstellationSpec) -> np.ndarray:
    """Gray bits of complex symbols; inverse of :func:`qam_map`."""
    s = np.asarray(symbols).ravel()
    x = np.concatenate([np.rint(s.real), np.rint(s.imag)]).astype(np.int64)
    return alphabet.point_bits(x)
