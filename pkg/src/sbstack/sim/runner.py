"""Monte Carlo runner.

Trial ``k`` at SNR point ``s`` of system ``j`` draws everything from
``default_rng([seed, j, round(1000 * s) + 10**6, k])``, and every decoder in
the run sees the same draws. Trials are grouped in chunks of
``CHUNK`` that may run on a process pool; chunk tallies are integer sums
merged in chunk order, so the output does not depend on the worker count.
With ``target_errors`` set, a point stops at the first chunk boundary where
every decoder has reached that many error events.
"""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..chain import (
    ConvCode,
    Interleaver,
    channel_sample,
    conv_encode,
    ebn0_to_sigma,
    noise_sample,
    snr_to_sigma,
    viterbi_decode_soft,
)
from ..constellation import ConstellationSpec
from ..lattice import RealLatticeSystem, StbcGenerator, qr_reduce, realify_matrix, stbc_flatten
from ..search import BudgetExceeded
from ..soft import llr_quantize
from .config import ExperimentConfig, SystemSpec
from .decoders import Detector, TrialContext, build_detector

log = logging.getLogger(__name__)

CHUNK = 50
CSV_HEADER = ("decoder", "snr_db", "trials", "error_events", "ser", "ber", "mean_mults", "mean_nodes", "seed")


@dataclass
class Tally:
    trials: int = 0
    skipped: int = 0
    detections: int = 0
    symbols: int = 0
    symbol_errors: int = 0
    bits: int = 0
    bit_errors: int = 0
    events: int = 0
    mults: int = 0
    nodes: int = 0

    def merge(self, other: "Tally") -> None:
        for k, v in vars(other).items():
            setattr(self, k, getattr(self, k) + v)


@dataclass(frozen=True)
class ResultRow:
    decoder: str
    snr_db: float
    trials: int
    error_events: int
    ser: float
    ber: float | None
    mean_mults: float
    mean_nodes: float
    seed: int
    skipped: int = field(default=0, compare=False)

    def __post_init__(self):
        if not 0 <= self.ser <= 1 or (self.ber is not None and not 0 <= self.ber <= 1):
            raise ValueError("error rates must lie in [0, 1]")

    @classmethod
    def from_tally(cls, label: str, snr: float, t: Tally, seed: int, coded: bool) -> "ResultRow":
        return cls(
            decoder=label,
            snr_db=snr,
            trials=t.trials,
            error_events=t.events,
            ser=t.symbol_errors / t.symbols if t.symbols else 0.0,
            ber=(t.bit_errors / t.bits if t.bits else 0.0) if coded else None,
            mean_mults=t.mults / t.detections if t.detections else 0.0,
            mean_nodes=t.nodes / t.detections if t.detections else 0.0,
            seed=seed,
            skipped=t.skipped,
        )

    def csv_fields(self) -> list[str]:
        return [
            self.decoder,
            repr(float(self.snr_db)),
            str(self.trials),
            str(self.error_events),
            repr(float(self.ser)),
            "" if self.ber is None else repr(float(self.ber)),
            repr(float(self.mean_mults)),
            repr(float(self.mean_nodes)),
            str(self.seed),
        ]


def _labels(cfg: ExperimentConfig) -> list[tuple[int, str, int]]:
    """``(system index, row label, decoder index)`` in output order."""
    out = []
    for j, s in enumerate(cfg.systems):
        for d, spec in enumerate(cfg.decoders):
            label = spec.label if len(cfg.systems) == 1 else f"{spec.label}@{s.format()}"
            out.append((j, label, d))
    return out


def trial_rng(seed: int, system_index: int, snr_db: float, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, system_index, int(round(snr_db * 1000)) + 10**6, trial])


class _Link:
    """Channel and noise model of one configured system."""

    def __init__(self, cfg: ExperimentConfig, system: SystemSpec):
        self.system = system
        self.alphabet = ConstellationSpec(system.q)
        self.scheme = cfg.scheme
        self.code = None
        if cfg.scheme == "STBC":
            self.code = StbcGenerator.golden() if cfg.code == "golden" else StbcGenerator.identity(system.m)
            self.symbols = system.m * system.m
        else:
            self.symbols = system.m
        self.dim = 2 * self.symbols
        self.bits_per_use = self.alphabet.bits_per_symbol * self.symbols

    def observe(self, x: np.ndarray, noise_var: float, rng: np.random.Generator):
        s = self.system
        h = channel_sample(s.m, s.n, rng)
        if self.code is None:
            g = realify_matrix(h.entries)
        else:
            g = stbc_flatten(h, self.code).generator
        y = g @ x + noise_sample(g.shape[0], noise_var, rng)
        return qr_reduce(RealLatticeSystem(g, y, noise_var))


def _detect(det: Detector, tri, ctx: TrialContext):
    try:
        return det.detect(tri, ctx)
    except BudgetExceeded as exc:
        log.warning("%s: trial skipped (%s)", det.spec.label, exc)
        return None


def _uncoded_chunk(cfg, j, snr, start, stop, detectors):
    link = _Link(cfg, cfg.systems[j])
    a = link.alphabet
    ctx = TrialContext(a, cfg.lattice)
    sigma2 = snr_to_sigma(snr, link.system.m, a.energy)
    tallies = [Tally() for _ in detectors]
    for k in range(start, stop):
        rng = trial_rng(cfg.master_seed, j, snr, k)
        x = a.from_shifted(rng.integers(0, a.side, link.dim))
        tri = link.observe(x, sigma2, rng)
        for det, t in zip(detectors, tallies):
            t.trials += 1
            res = _detect(det, tri, ctx)
            if res is None:
                t.skipped += 1
                continue
            t.detections += 1
            t.mults += res.stats.real_mults
            t.nodes += res.stats.nodes_visited
            # a complex symbol is wrong if either real component is
            wrong = res.point != x
            sym_wrong = int(np.count_nonzero(wrong[: link.symbols] | wrong[link.symbols :]))
            t.symbols += link.symbols
            t.symbol_errors += sym_wrong
            t.events += sym_wrong > 0
            bits = a.point_bits(res.point)
            t.bits += bits.size
            t.bit_errors += int(np.count_nonzero(bits != a.point_bits(x)))
    return tallies


def _coded_chunk(cfg, j, snr, start, stop, detectors):
    link = _Link(cfg, cfg.systems[j])
    a = link.alphabet
    ctx = TrialContext(a, cfg.lattice)
    code = ConvCode(tuple(cfg.generators))
    n_coded = code.coded_length(cfg.info_bits)
    per_use = link.bits_per_use
    uses = -(-n_coded // per_use)
    inter = Interleaver(n_coded, cfg.master_seed) if cfg.interleave else None
    sigma2 = ebn0_to_sigma(snr, code.rate, a.bits_per_symbol, link.system.m, link.system.n, a.energy)
    tallies = [Tally() for _ in detectors]
    for k in range(start, stop):
        rng = trial_rng(cfg.master_seed, j, snr, k)
        info = rng.integers(0, 2, cfg.info_bits)
        coded = conv_encode(info, code)
        if inter is not None:
            coded = inter.interleave(coded)
        tx = np.concatenate([coded, rng.integers(0, 2, uses * per_use - n_coded)]).astype(np.int64)
        blocks = tx.reshape(uses, per_use)
        xs = [a.bits_to_point(b) for b in blocks]
        tris = [link.observe(x, sigma2, rng) for x in xs]
        for det, t in zip(detectors, tallies):
            t.trials += 1
            llr = np.empty(uses * per_use)
            sym_err = 0
            stats_m = stats_n = 0
            failed = False
            for u, (x, tri) in enumerate(zip(xs, tris)):
                res = _detect(det, tri, ctx)
                if res is None:
                    failed = True
                    break
                stats_m += res.stats.real_mults
                stats_n += res.stats.nodes_visited
                wrong = res.point != x
                sym_err += int(np.count_nonzero(wrong[: link.symbols] | wrong[link.symbols :]))
                llr[u * per_use : (u + 1) * per_use] = det.llrs(res, ctx, sigma2).ravel()
            if failed:
                t.skipped += 1
                continue
            t.detections += uses
            t.mults += stats_m
            t.nodes += stats_n
            t.symbols += uses * link.symbols
            t.symbol_errors += sym_err
            llr = llr[:n_coded]
            if inter is not None:
                llr = inter.deinterleave(llr)
            if cfg.llr_bits is not None:
                llr = llr_quantize(llr, cfg.llr_bits)
            decoded = viterbi_decode_soft(llr, code)
            errs = int(np.count_nonzero(decoded != info))
            t.bits += cfg.info_bits
            t.bit_errors += errs
            t.events += errs > 0
    return tallies


def _run_chunk(args):
    cfg, j, snr, start, stop = args
    detectors = [build_detector(d) for d in cfg.decoders]
    fn = _coded_chunk if cfg.coded else _uncoded_chunk
    return fn(cfg, j, snr, start, stop, detectors)


def _point(cfg: ExperimentConfig, j: int, snr: float, pool, workers: int) -> list[Tally]:
    totals = [Tally() for _ in cfg.decoders]
    chunks = [(cfg, j, snr, s, min(s + CHUNK, cfg.trials)) for s in range(0, cfg.trials, CHUNK)]
    batch = 1 if pool is None else workers
    for b in range(0, len(chunks), batch):
        group = chunks[b : b + batch]
        results = map(_run_chunk, group) if pool is None else pool.map(_run_chunk, group)
        for tallies in results:
            if cfg.target_errors is not None and min(t.events for t in totals) >= cfg.target_errors:
                break  # later chunks of the batch are dropped for determinism
            for total, t in zip(totals, tallies):
                total.merge(t)
        if cfg.target_errors is not None and min(t.events for t in totals) >= cfg.target_errors:
            break
    return totals


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> list[ResultRow]:
    """Run every (system, decoder, SNR) point; rows come out per decoder in SNR order."""
    for d in cfg.decoders:
        build_detector(d)  # surface configuration errors before any work
    rows: dict[tuple[int, int], list[tuple[float, Tally]]] = {}
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for j in range(len(cfg.systems)):
            for snr in cfg.snr_grid:
                totals = _point(cfg, j, snr, pool, workers)
                log.info("system %s snr %.2f done", cfg.systems[j].format(), snr)
                for d, t in enumerate(totals):
                    rows.setdefault((j, d), []).append((snr, t))
    finally:
        if pool is not None:
            pool.shutdown()
    out = []
    for j, label, d in _labels(cfg):
        for snr, t in rows[(j, d)]:
            out.append(ResultRow.from_tally(label, snr, t, cfg.master_seed, cfg.coded))
    return out


def rows_to_csv(rows: list[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.csv_fields())
    return buf.getvalue()


def write_csv(rows: list[ResultRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows))
