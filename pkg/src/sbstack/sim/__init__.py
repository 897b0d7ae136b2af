"""Monte Carlo experiment runner and CLI."""

from .config import ConfigError, DecoderSpec, ExperimentConfig, SystemSpec, format_config, load_config, parse_config
from .presets import PRESETS, preset
from .runner import CSV_HEADER, ResultRow, rows_to_csv, run_experiment, write_csv

__all__ = [
    "CSV_HEADER",
    "ConfigError",
    "DecoderSpec",
    "ExperimentConfig",
    "PRESETS",
    "ResultRow",
    "SystemSpec",
    "format_config",
    "load_config",
    "parse_config",
    "preset",
    "rows_to_csv",
    "run_experiment",
    "write_csv",
]
