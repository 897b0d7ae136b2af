"""Command line entry point: ``sbstack run`` and ``sbstack list-decoders``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, load_config
from .decoders import describe
from .presets import PRESETS, preset
from .runner import rows_to_csv, run_experiment


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sbstack", description="Monte Carlo MIMO decoding experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write a CSV table")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="path to a key = value config file")
    src.add_argument("--preset", choices=sorted(PRESETS), help="built-in configuration")
    run.add_argument("--seed", type=int, help="override the master seed")
    run.add_argument("--out", help="CSV output path (default: stdout)")
    run.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    run.add_argument("--trials", type=int, help="override trials per SNR point")
    run.add_argument("--snr-min", type=float)
    run.add_argument("--snr-max", type=float)
    run.add_argument("--snr-step", type=float)
    run.add_argument("-v", "--verbose", action="store_true")

    sub.add_parser("list-decoders", help="show decoder names and parameters")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-decoders":
        for name, doc in describe():
            print(f"{name:14s} {doc}")
        return 0

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config) if args.config else preset(args.preset)
        cfg = cfg.with_overrides(
            seed=args.seed,
            trials=args.trials,
            snr_min=args.snr_min,
            snr_max=args.snr_max,
            snr_step=args.snr_step,
        )
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        rows = run_experiment(cfg, workers=args.workers)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = rows_to_csv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
