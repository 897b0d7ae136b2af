"""Named decoders for the experiment runner.

Every entry turns a :class:`DecoderSpec` into a callable
``detect(system, ctx) -> Detection``. ``system`` is the reduced problem in
real amplitudes; in lattice mode the decoder searches ``Z^n`` on the shifted
problem and the result is mapped back (and may leave the constellation).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from ..constellation import ConstellationSpec
from ..lattice import TriangularSystem, babai_point, brute_force_ml, shift_system, zf_point
from ..search import (
    RadiusPolicy,
    SearchStats,
    initial_radius,
    neighbor_stack_decode,
    sb_stack_decode,
    sphere_decode,
    stack_decode,
)
from ..soft import (
    LLR_MAX,
    CandidateList,
    ListPolicy,
    list_radius,
    list_sphere_decode,
    llr_exact,
    llr_maxlog,
    shifted_list_decode,
    soft_sb_stack,
)
from .config import ConfigError, DecoderSpec


@dataclass(frozen=True)
class TrialContext:
    alphabet: ConstellationSpec
    lattice: bool = False


class Detection(NamedTuple):
    point: np.ndarray
    stats: SearchStats
    candidates: CandidateList | None = None


class Detector:
    """A configured decoder: ``detect`` for hard points, ``llrs`` for coded runs."""

    def __init__(self, spec: DecoderSpec, run: Callable, soft: bool, llr: str = "maxlog"):
        self.spec = spec
        self._run = run
        self.soft = soft
        self.llr = llr

    def detect(self, system: TriangularSystem, ctx: TrialContext) -> Detection:
        return self._run(system, ctx)

    def llrs(self, det: Detection, ctx: TrialContext, noise_var: float) -> np.ndarray:
        """Bit LLRs of one detection; ``noise_var`` is per real dimension."""
        if det.candidates is None:
            bits = ctx.alphabet.point_bits(det.point)
            return LLR_MAX * (2.0 * bits - 1.0)
        fn = llr_exact if self.llr == "exact" else llr_maxlog
        return fn(det.candidates, ctx.alphabet, 2.0 * noise_var)


def _radius(value: str | None, default: str = "noise_and_fading") -> RadiusPolicy:
    value = value or default
    if value in ("noise_and_fading", "noise_scaled"):
        return RadiusPolicy(value)
    try:
        return RadiusPolicy.fixed(float(value))
    except ValueError as exc:
        raise ConfigError(f"bad radius {value!r}") from exc


def _lattice_wrap(search: Callable, finite_only: bool, name: str) -> Callable:
    """Run ``search(system, alphabet)`` on the constellation or on ``Z^n``."""

    def run(system: TriangularSystem, ctx: TrialContext) -> Detection:
        if not ctx.lattice:
            pt, stats = search(system, ctx.alphabet)
            return Detection(np.asarray(pt, dtype=np.int64), stats)
        if finite_only:
            raise ConfigError(f"{name} needs a finite alphabet (lattice mode is on)")
        u, stats = search(shift_system(system, ctx.alphabet), None)
        return Detection(ctx.alphabet.from_shifted(np.asarray(u)), stats)

    return run


def _soft_wrap(make_list: Callable, name: str) -> Callable:
    def run(system: TriangularSystem, ctx: TrialContext) -> Detection:
        if ctx.lattice:
            raise ConfigError(f"{name} needs a finite alphabet (lattice mode is on)")
        lst = make_list(system, ctx.alphabet)
        return Detection(lst.points[0].copy(), lst.stats, lst)

    return run


class _Params:
    """Typed access to decoder options; unknown keys are an error."""

    def __init__(self, spec: DecoderSpec, allowed: set[str]):
        opts = spec.options
        extra = set(opts) - allowed
        if extra:
            raise ConfigError(f"{spec.name}: unknown parameter(s) {sorted(extra)}")
        self.opts = opts
        self.name = spec.name

    def get(self, key, cast=str, default=None):
        if key not in self.opts:
            return default
        try:
            return cast(self.opts[key])
        except ValueError as exc:
            raise ConfigError(f"{self.name}: bad value for {key}") from exc

    def require(self, key, cast=str):
        if key not in self.opts:
            raise ConfigError(f"{self.name}: parameter {key} is required")
        return self.get(key, cast)


def _bias_factor(p: _Params) -> float:
    """Bias in multiples of the per-dimension noise variance."""
    b = p.get("bias", float, 0.0)
    if b < 0:
        raise ConfigError(f"{p.name}: bias must be nonnegative")
    return b


def _bool(v: str) -> bool:
    if v.lower() in ("1", "true", "yes"):
        return True
    if v.lower() in ("0", "false", "no"):
        return False
    raise ValueError(v)


def _order(v: str) -> str:
    v = {"se": "schnorr_euchner"}.get(v, v)
    if v not in ("pohst", "schnorr_euchner"):
        raise ValueError(v)
    return v


def _llr_kind(v: str) -> str:
    if v not in ("maxlog", "exact"):
        raise ValueError(v)
    return v


def _ml(spec):
    _Params(spec, set())

    def search(system, alphabet):
        res = sphere_decode(system, RadiusPolicy(), alphabet, order="schnorr_euchner")
        return res.point, res.stats

    return _lattice_wrap(search, False, spec.name), False


def _brute(spec):
    _Params(spec, set())

    def search(system, alphabet):
        pt, _ = brute_force_ml(system, alphabet)
        return pt, SearchStats()

    return _lattice_wrap(search, True, spec.name), False


def _zf(spec):
    _Params(spec, set())

    def search(system, alphabet):
        rho = zf_point(system)
        if alphabet is None:
            pt = np.floor(rho + 0.5)
        else:
            pt = np.array([alphabet.nearest(v) for v in rho])
        return pt, SearchStats()

    return _lattice_wrap(search, False, spec.name), False


def _zf_dfe(spec):
    _Params(spec, set())

    def search(system, alphabet):
        return babai_point(system, alphabet), SearchStats()

    return _lattice_wrap(search, False, spec.name), False


def _sphere(spec):
    p = _Params(spec, {"radius", "order"})
    policy = _radius(p.get("radius"))
    order = p.get("order", _order, "pohst")

    def search(system, alphabet):
        res = sphere_decode(system, policy, alphabet, order=order)
        return res.point, res.stats

    return _lattice_wrap(search, False, spec.name), False


def _sb_stack(spec):
    p = _Params(spec, {"radius", "bias"})
    policy = _radius(p.get("radius"))
    b = _bias_factor(p)

    def search(system, alphabet):
        res = sb_stack_decode(system, policy, b * system.noise_var, alphabet)
        return res.point, res.stats

    return _lattice_wrap(search, False, spec.name), False


def _stack(spec):
    p = _Params(spec, {"bias"})
    b = _bias_factor(p)

    def search(system, alphabet):
        res = stack_decode(system, alphabet, b * system.noise_var)
        return res.point, res.stats

    return _lattice_wrap(search, True, spec.name), False


def _kbest(spec):
    p = _Params(spec, {"k", "bias"})
    k = p.require("k", int)
    if k < 1:
        raise ConfigError("kbest: k must be at least 1")
    b = _bias_factor(p)

    def search(system, alphabet):
        res = stack_decode(system, alphabet, b * system.noise_var, cap=k)
        return res.point, res.stats

    return _lattice_wrap(search, True, spec.name), False


def _neighbor(spec):
    p = _Params(spec, {"t", "bias"})
    t = p.require("t", int)
    if t < 0:
        raise ConfigError("neighbor: t must be nonnegative")
    b = _bias_factor(p)

    def search(system, alphabet):
        res = neighbor_stack_decode(system, t, b * system.noise_var, alphabet)
        return res.point, res.stats

    return _lattice_wrap(search, False, spec.name), False


def _list_size(p: _Params) -> int:
    n_p = p.get("list", int, 6)
    if n_p < 1:
        raise ConfigError(f"{p.name}: list must be at least 1")
    return n_p


def _soft_sb_stack(spec):
    p = _Params(spec, {"list", "bias", "radius", "refill", "llr"})
    n_p = _list_size(p)
    radius = p.get("radius", str, "list")
    refill = p.get("refill", _bool, True)
    b = _bias_factor(p)
    policy = None if radius == "list" else _radius(radius)

    def make(system, alphabet):
        prob_sys = shift_system(system, alphabet)
        if policy is None:
            c2 = list_radius(system, n_p)
        else:
            c2 = initial_radius(policy, prob_sys)
        return soft_sb_stack(
            system, alphabet, c2, ListPolicy.fixed_size(n_p), b * system.noise_var, refill=refill
        )

    return _soft_wrap(make, spec.name), True


def _lsd(spec):
    p = _Params(spec, {"list", "zeta", "llr"})
    n_p = _list_size(p)
    zeta = p.get("zeta", float)

    def make(system, alphabet):
        return list_sphere_decode(system, alphabet, n_p, zeta)

    return _soft_wrap(make, spec.name), True


def _ssd(spec):
    p = _Params(spec, {"list", "expansion", "llr"})
    n_p = _list_size(p)
    expansion = p.get("expansion", float, 1.0)

    def make(system, alphabet):
        return shifted_list_decode(system, alphabet, n_p, expansion)

    return _soft_wrap(make, spec.name), True


REGISTRY: dict[str, tuple[Callable, str]] = {
    "ml": (_ml, "exact ML by Schnorr-Euchner sphere search"),
    "brute": (_brute, "exhaustive ML (small systems only)"),
    "zf": (_zf, "zero forcing, componentwise slicing"),
    "zf_dfe": (_zf_dfe, "ZF-DFE / Babai point"),
    "sphere": (_sphere, "sphere decoder; radius=noise_and_fading|noise_scaled|<C^2> order=pohst|se"),
    "sb_stack": (_sb_stack, "SB-Stack; radius=..., bias=<multiple of sigma^2>"),
    "stack": (_stack, "classical stack over the full tree; bias=..."),
    "kbest": (_kbest, "K-best stack; k=<K> (required), bias=..."),
    "neighbor": (_neighbor, "stack over a box around the Babai point; t=<half-width> (required)"),
    "soft_sb_stack": (_soft_sb_stack, "soft SB-Stack list; list=6 bias=0 radius=list refill=true llr=maxlog|exact"),
    "lsd": (_lsd, "list sphere decoder; list=6 zeta=<auto> llr=maxlog|exact"),
    "ssd": (_ssd, "shifted spherical list around the ML point; list=6 expansion=1 llr=..."),
}


def build_detector(spec: DecoderSpec) -> Detector:
    if spec.name not in REGISTRY:
        raise ConfigError(f"unknown decoder {spec.name!r}; see list-decoders")
    run, soft = REGISTRY[spec.name][0](spec)
    llr = _Params(spec, set(spec.options)).get("llr", _llr_kind, "maxlog")
    return Detector(spec, run, soft, llr)


def describe() -> list[tuple[str, str]]:
    return [(name, doc) for name, (_, doc) in REGISTRY.items()]
