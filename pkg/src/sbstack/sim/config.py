"""Experiment configuration and its flat ``key = value`` file format.

Example::

    schema_version = 1
    scheme = SM                  # SM or STBC
    code = golden                # STBC only: golden | identity
    systems = 4x4/16             # MxN/q, comma separated for several
    lattice = false              # decode on Z^n instead of the constellation
    decoders = sphere; sb_stack bias=0.5; neighbor t=2
    snr = 0, 5, 10               # or snr_min / snr_max / snr_step
    trials = 1000                # per SNR point (frames when coded)
    target_errors = 100          # optional early stop
    seed = 1
    coded = false
    info_bits = 200
    generators = 7, 5            # octal
    interleave = false
    llr_bits = 4                 # optional LLR quantisation (m bits)

``bias`` is given in multiples of the per-real-dimension noise variance.
For coded runs the SNR grid is read as Eb/N0 in dB.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DecoderSpec:
    name: str
    params: tuple[tuple[str, str], ...] = ()
    label: str = ""

    def __post_init__(self):
        if not self.label:
            extra = ",".join(f"{k}={v}" for k, v in self.params)
            object.__setattr__(self, "label", f"{self.name}[{extra}]" if extra else self.name)

    @property
    def options(self) -> dict[str, str]:
        return dict(self.params)

    @classmethod
    def parse(cls, text: str) -> "DecoderSpec":
        parts = text.split()
        if not parts:
            raise ConfigError("empty decoder entry")
        params = []
        label = ""
        for item in parts[1:]:
            key, sep, value = item.partition("=")
            if not sep or not key or not value:
                raise ConfigError(f"bad decoder parameter {item!r}")
            if key == "label":
                label = value
            else:
                params.append((key, value))
        return cls(parts[0], tuple(params), label)

    def format(self) -> str:
        items = [self.name] + [f"{k}={v}" for k, v in self.params]
        default = DecoderSpec(self.name, self.params).label
        if self.label != default:
            items.append(f"label={self.label}")
        return " ".join(items)


@dataclass(frozen=True)
class SystemSpec:
    m: int
    n: int
    q: int

    @classmethod
    def parse(cls, text: str) -> "SystemSpec":
        try:
            dims, q = text.strip().split("/")
            m, n = dims.lower().split("x")
            return cls(int(m), int(n), int(q))
        except ValueError as exc:
            raise ConfigError(f"bad system {text!r}, expected MxN/q") from exc

    def format(self) -> str:
        return f"{self.m}x{self.n}/{self.q}"


@dataclass(frozen=True)
class ExperimentConfig:
    systems: tuple[SystemSpec, ...]
    decoders: tuple[DecoderSpec, ...]
    snr_grid: tuple[float, ...]
    trials: int
    master_seed: int = 0
    scheme: str = "SM"
    code: str = "golden"
    lattice: bool = False
    target_errors: int | None = None
    coded: bool = False
    info_bits: int = 200
    generators: tuple[int, int] = (0o7, 0o5)
    interleave: bool = False
    llr_bits: int | None = None
    schema_version: int = field(default=SCHEMA_VERSION)

    def __post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {self.schema_version}")
        if not self.systems:
            raise ConfigError("at least one system is required")
        if not self.decoders:
            raise ConfigError("at least one decoder is required")
        if not self.snr_grid:
            raise ConfigError("snr grid is empty")
        if any(b <= a for a, b in zip(self.snr_grid, self.snr_grid[1:])):
            raise ConfigError("snr grid must be strictly increasing")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.target_errors is not None and self.target_errors < 1:
            raise ConfigError("target_errors must be positive")
        if self.scheme not in ("SM", "STBC"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.scheme == "STBC":
            for s in self.systems:
                if s.m != s.n:
                    raise ConfigError("STBC needs M = N")
                if self.code == "golden" and s.m != 2:
                    raise ConfigError("the golden code is 2x2")
            if self.code not in ("golden", "identity"):
                raise ConfigError(f"unknown code {self.code!r}")
        if self.coded and self.info_bits < 1:
            raise ConfigError("info_bits must be positive")
        if self.llr_bits is not None and self.llr_bits < 2:
            raise ConfigError("llr_bits must be at least 2")
        labels = [d.label for d in self.decoders]
        if len(set(labels)) != len(labels):
            raise ConfigError("decoder labels must be unique")

    def with_overrides(
        self,
        *,
        seed: int | None = None,
        trials: int | None = None,
        snr_min: float | None = None,
        snr_max: float | None = None,
        snr_step: float | None = None,
    ) -> "ExperimentConfig":
        cfg = self
        if seed is not None:
            cfg = replace(cfg, master_seed=seed)
        if trials is not None:
            cfg = replace(cfg, trials=trials)
        if snr_min is not None or snr_max is not None or snr_step is not None:
            lo = cfg.snr_grid[0] if snr_min is None else snr_min
            hi = cfg.snr_grid[-1] if snr_max is None else snr_max
            if snr_step is None:
                step = cfg.snr_grid[1] - cfg.snr_grid[0] if len(cfg.snr_grid) > 1 else 1.0
            else:
                step = snr_step
            cfg = replace(cfg, snr_grid=snr_range(lo, hi, step))
        return cfg


def snr_range(lo: float, hi: float, step: float) -> tuple[float, ...]:
    if step <= 0:
        raise ConfigError("snr step must be positive")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    if count < 1:
        raise ConfigError("empty snr range")
    return tuple(round(lo + k * step, 10) for k in range(count))


def _bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {value!r}")


def _floats(value: str) -> tuple[float, ...]:
    return tuple(float(v) for v in value.split(",") if v.strip())


KNOWN_KEYS = {
    "schema_version", "scheme", "code", "systems", "lattice", "decoders", "snr",
    "snr_min", "snr_max", "snr_step", "trials", "target_errors", "seed", "coded",
    "info_bits", "generators", "interleave", "llr_bits",
}


def parse_config(text: str) -> ExperimentConfig:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected key = value")
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        raw[key] = value.strip()
    if "schema_version" not in raw:
        raise ConfigError("schema_version is required")
    try:
        if "snr" in raw:
            grid = _floats(raw["snr"])
        elif "snr_min" in raw and "snr_max" in raw:
            grid = snr_range(
                float(raw["snr_min"]), float(raw["snr_max"]), float(raw.get("snr_step", 1))
            )
        else:
            raise ConfigError("give snr or snr_min/snr_max")
        target = raw.get("target_errors", "")
        llr_bits = raw.get("llr_bits", "")
        return ExperimentConfig(
            schema_version=int(raw["schema_version"]),
            scheme=raw.get("scheme", "SM").upper(),
            code=raw.get("code", "golden"),
            systems=tuple(SystemSpec.parse(s) for s in raw.get("systems", "").split(",") if s.strip()),
            lattice=_bool(raw.get("lattice", "false")),
            decoders=tuple(DecoderSpec.parse(d) for d in raw.get("decoders", "").split(";") if d.strip()),
            snr_grid=grid,
            trials=int(raw.get("trials", "0")),
            target_errors=int(target) if target else None,
            master_seed=int(raw.get("seed", "0")),
            coded=_bool(raw.get("coded", "false")),
            info_bits=int(raw.get("info_bits", "200")),
            generators=tuple(int(g.strip(), 8) for g in raw.get("generators", "7,5").split(",")),
            interleave=_bool(raw.get("interleave", "false")),
            llr_bits=int(llr_bits) if llr_bits else None,
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def format_config(cfg: ExperimentConfig) -> str:
    lines = [
        f"schema_version = {cfg.schema_version}",
        f"scheme = {cfg.scheme}",
        f"code = {cfg.code}",
        f"systems = {', '.join(s.format() for s in cfg.systems)}",
        f"lattice = {str(cfg.lattice).lower()}",
        f"decoders = {'; '.join(d.format() for d in cfg.decoders)}",
        f"snr = {', '.join(repr(float(s)) for s in cfg.snr_grid)}",
        f"trials = {cfg.trials}",
        f"seed = {cfg.master_seed}",
        f"coded = {str(cfg.coded).lower()}",
        f"info_bits = {cfg.info_bits}",
        f"generators = {', '.join(format(g, 'o') for g in cfg.generators)}",
        f"interleave = {str(cfg.interleave).lower()}",
    ]
    if cfg.target_errors is not None:
        lines.append(f"target_errors = {cfg.target_errors}")
    if cfg.llr_bits is not None:
        lines.append(f"llr_bits = {cfg.llr_bits}")
    return "\n".join(lines) + "\n"
