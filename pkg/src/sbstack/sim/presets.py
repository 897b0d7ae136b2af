"""Desk-scale experiment presets.

Trial counts aim at roughly 100 or more error events per point in the
waterfall region at a few minutes of single-core run time. They are
upper bounds when ``target_errors`` is set.
"""

from __future__ import annotations

from .config import ConfigError, DecoderSpec, ExperimentConfig, SystemSpec, snr_range


def _decoders(*items: str) -> tuple[DecoderSpec, ...]:
    return tuple(DecoderSpec.parse(s) for s in items)


def _fig3() -> ExperimentConfig:
    # SER of the Babai-centred box search on Z^n against ML
    return ExperimentConfig(
        systems=(SystemSpec(4, 4, 4),),
        lattice=True,
        decoders=_decoders("ml", "neighbor t=1", "neighbor t=2", "neighbor t=3", "neighbor t=4"),
        snr_grid=snr_range(0, 20, 2),
        trials=5000,
        target_errors=300,
        master_seed=3,
    )


def _fig6() -> ExperimentConfig:
    return ExperimentConfig(
        systems=(SystemSpec(2, 2, 4), SystemSpec(4, 4, 4)),
        lattice=True,
        decoders=_decoders("sphere", "sb_stack"),
        snr_grid=snr_range(0, 20, 2),
        trials=2000,
        master_seed=6,
    )


def _fig7() -> ExperimentConfig:
    return ExperimentConfig(
        systems=(SystemSpec(4, 4, 16), SystemSpec(4, 4, 64)),
        decoders=_decoders("sphere", "stack"),
        snr_grid=snr_range(10, 30, 5),
        trials=200,
        master_seed=7,
    )


def _fig8() -> ExperimentConfig:
    return ExperimentConfig(
        systems=(SystemSpec(4, 4, 16),),
        decoders=_decoders("sphere radius=noise_scaled", "sb_stack radius=noise_scaled"),
        snr_grid=snr_range(0, 20, 5),
        trials=2000,
        master_seed=8,
    )


def _fig9() -> ExperimentConfig:
    return ExperimentConfig(
        systems=(SystemSpec(2, 2, 16),),
        decoders=_decoders(
            "ml",
            "sb_stack bias=0",
            "sb_stack bias=0.1",
            "sb_stack bias=0.5",
            "sb_stack bias=1",
            "sb_stack bias=10",
            "zf_dfe",
        ),
        snr_grid=snr_range(0, 20, 2),
        trials=5000,
        target_errors=300,
        master_seed=9,
    )


def _fig13() -> ExperimentConfig:
    return ExperimentConfig(
        systems=(SystemSpec(2, 2, 4),),
        decoders=_decoders("soft_sb_stack list=6", "lsd list=6", "ssd list=6", "soft_sb_stack list=2"),
        snr_grid=snr_range(0, 8, 2),
        trials=500,
        coded=True,
        info_bits=200,
        generators=(0o7, 0o5),
        master_seed=13,
    )


PRESETS = {
    "fig3": _fig3,
    "fig6": _fig6,
    "fig7": _fig7,
    "fig8": _fig8,
    "fig9": _fig9,
    "fig13": _fig13,
}


def preset(name: str) -> ExperimentConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
