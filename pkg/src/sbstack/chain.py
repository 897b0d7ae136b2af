"""Coded transmission chain: convolutional code, Viterbi, fading and noise.

SNR bookkeeping assumes each receive antenna collects ``M * Es`` of signal
energy per channel use (unit-variance fading, ``Es`` the average complex
symbol energy) against complex noise variance ``N0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .lattice import ComplexChannel

__all__ = [
    "ConvCode",
    "Interleaver",
    "channel_sample",
    "conv_encode",
    "ebn0_to_sigma",
    "noise_sample",
    "snr_to_sigma",
    "viterbi_decode_soft",
]


def _parity(v: int) -> int:
    return bin(v).count("1") & 1


@dataclass(frozen=True)
class ConvCode:
    """Rate-1/2 feedforward convolutional code given by octal generators.

    The register holds ``(u_t, u_{t-1}, ..., u_{t-memory})`` with ``u_t`` the
    most significant tap, so (7, 5) is the textbook 4-state code.
    """

    generators: tuple[int, int] = (0o7, 0o5)
    memory: int = 2

    def __post_init__(self):
        top = 1 << (self.memory + 1)
        if len(self.generators) != 2 or any(not 0 < g < top for g in self.generators):
            raise ValueError("need two generators fitting the register")

    @property
    def rate(self) -> float:
        return 0.5

    @property
    def num_states(self) -> int:
        return 1 << self.memory

    def coded_length(self, info_length: int) -> int:
        return 2 * (info_length + self.memory)

    @cached_property
    def trellis(self) -> tuple[np.ndarray, np.ndarray]:
        """``next_state[s, u]`` and ``outputs[s, u, :]`` (two code bits)."""
        ns = np.zeros((self.num_states, 2), dtype=np.int64)
        out = np.zeros((self.num_states, 2, 2), dtype=np.int8)
        for s in range(self.num_states):
            for u in (0, 1):
                reg = (u << self.memory) | s
                ns[s, u] = reg >> 1
                out[s, u] = [_parity(reg & g) for g in self.generators]
        return ns, out


def conv_encode(bits, code: ConvCode = ConvCode()) -> np.ndarray:
    """Zero-tailed encoding; output length ``2 * (len(bits) + memory)``."""
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must be 0/1")
    ns, out = code.trellis
    s = 0
    coded = np.empty(code.coded_length(bits.size), dtype=np.int8)
    for t, u in enumerate(np.concatenate([bits, np.zeros(code.memory, dtype=np.int64)])):
        coded[2 * t : 2 * t + 2] = out[s, u]
        s = ns[s, u]
    return coded


def viterbi_decode_soft(llrs, code: ConvCode = ConvCode()) -> np.ndarray:
    """Maximum-correlation Viterbi decoding of a zero-tailed frame.

    Maximises ``sum_j llr_j * (2 c_j - 1)`` over paths that start and end in
    state 0 (LLR > 0 favours a 1). Ties keep the branch with input 0.
    """
    llrs = np.asarray(llrs, dtype=float).ravel()
    if llrs.size % 2 or llrs.size < 2 * (code.memory + 1):
        raise ValueError(f"LLR length {llrs.size} does not fit a terminated frame")
    steps = llrs.size // 2
    ns, out = code.trellis
    S = code.num_states
    signs = 2.0 * out - 1.0  # (S, 2, 2)
    branch = np.einsum("suk,tk->tsu", signs, llrs.reshape(steps, 2))
    metric = np.full(S, -np.inf)
    metric[0] = 0.0
    prev_state = np.zeros((steps, S), dtype=np.int64)
    prev_input = np.zeros((steps, S), dtype=np.int8)
    for t in range(steps):
        new = np.full(S, -np.inf)
        # input 0 first so that a tie keeps the zero branch
        for u in (0, 1):
            if t >= steps - code.memory and u == 1:
                continue  # tail bits are zero
            cand = metric + branch[t, :, u]
            for s in range(S):
                d = ns[s, u]
                if cand[s] > new[d]:
                    new[d] = cand[s]
                    prev_state[t, d] = s
                    prev_input[t, d] = u
        metric = new
    s = 0
    decided = np.zeros(steps, dtype=np.int8)
    for t in range(steps - 1, -1, -1):
        decided[t] = prev_input[t, s]
        s = prev_state[t, s]
    return decided[: steps - code.memory].astype(np.int64)


@dataclass(frozen=True)
class Interleaver:
    """Fixed pseudo-random permutation keyed by ``seed``."""

    length: int
    seed: int = 0

    @cached_property
    def permutation(self) -> np.ndarray:
        return np.random.default_rng(self.seed).permutation(self.length)

    def interleave(self, x) -> np.ndarray:
        return np.asarray(x)[self.permutation]

    def deinterleave(self, x) -> np.ndarray:
        out = np.empty_like(np.asarray(x))
        out[self.permutation] = x
        return out


def channel_sample(m: int, n: int, rng: np.random.Generator) -> ComplexChannel:
    """N x M Rayleigh channel, entries CN(0, 1) (variance 0.5 per real part)."""
    if m < 1 or n < 1:
        raise ValueError("antenna counts must be positive")
    h = (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) * np.sqrt(0.5)
    return ComplexChannel(h)


def noise_sample(n: int, noise_var: float, rng: np.random.Generator) -> np.ndarray:
    """Real Gaussian noise, variance ``noise_var`` per component."""
    return rng.standard_normal(n) * np.sqrt(noise_var)


def snr_to_sigma(snr_db: float, m: int, symbol_energy: float) -> float:
    """Per-real-dimension noise variance for a per-receive-antenna SNR."""
    n0 = m * symbol_energy / 10 ** (snr_db / 10)
    return n0 / 2


def ebn0_to_sigma(
    ebn0_db: float, rate: float, bits_per_symbol: int, m: int, n: int, symbol_energy: float = 1.0
) -> float:
    """Per-real-dimension noise variance for a given Eb/N0.

    The spectral efficiency is ``rate * B * M`` bits per channel use and each
    receive antenna sees ``M * Es`` per use, so ``Eb = Es / (rate * B)`` and
    ``N0 = Es / (rate * B * Eb/N0)``. ``n`` does not enter (per-antenna
    accounting) but is accepted for symmetry with the channel shape.
    """
    if n < 1:
        raise ValueError("n must be positive")
    efficiency = rate * bits_per_symbol * m
    n0 = m * symbol_energy / (efficiency * 10 ** (ebn0_db / 10))
    return n0 / 2
