"""Command-line interface.

    qbm run    --config cfg.toml [--out DIR] [--format csv,svg] [--threads N]
    qbm sweep  --config cfg.toml [--out DIR] [--format ...] [--threads N]
    qbm preset NAME [--out DIR] [--format ...] [--threads N]
    qbm preset --list

Exit codes: 0 success, 2 configuration error, 3 numerical failure
(instability, truncation, non-convergence).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import load_config
from .emit import emit
from .errors import ConfigError, NumericsError
from .presets import preset_config, preset_names, preset_note
from .runner import run as run_config
from .runner import sweep as sweep_config

_FORMATS = ("csv", "json", "svg")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="qbm",
        description="Energy-exchange statistics and non-Markovianity "
        "witness for quantum Brownian motion.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument(
            "--format",
            default="csv",
            help="comma-separated output formats: csv, json, svg (default csv)",
        )
        p.add_argument(
            "--threads",
            type=int,
            default=1,
            help="worker processes for sweep rows (default 1)",
        )

    run_p = sub.add_parser("run", help="single parameter point")
    run_p.add_argument("--config", required=True, help="TOML config file")
    add_common(run_p)

    sweep_p = sub.add_parser("sweep", help="one-axis parameter sweep")
    sweep_p.add_argument("--config", required=True, help="TOML config file")
    add_common(sweep_p)

    preset_p = sub.add_parser("preset", help="packaged figure-data preset")
    preset_p.add_argument("name", nargs="?", help="preset name (see --list)")
    preset_p.add_argument(
        "--list", action="store_true", help="list available presets"
    )
    add_common(preset_p)
    return parser


def _parse_formats(raw):
    formats = tuple(part.strip() for part in raw.split(",") if part.strip())
    if not formats:
        raise ConfigError("--format must name at least one of csv, json, svg")
    for fmt in formats:
        if fmt not in _FORMATS:
            raise ConfigError(f"unknown format {fmt!r}; choose from {_FORMATS}")
    return formats


def _execute(config, threads):
    if config.sweep is not None:
        return sweep_config(config, threads=threads)
    return run_config(config)


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "preset" and args.list:
            for name in preset_names():
                print(f"{name:8s} {preset_note(name)}")
            return 0

        formats = _parse_formats(args.format)
        if args.threads < 1:
            raise ConfigError(f"--threads must be >= 1, got {args.threads}")

        if args.command == "run":
            config = load_config(args.config)
            if config.sweep is not None:
                raise ConfigError(
                    "config defines a [sweep] table; use `qbm sweep`"
                )
            out_dir = args.out or f"{Path(args.config).stem}_out"
            bundle = run_config(config)
        elif args.command == "sweep":
            config = load_config(args.config)
            out_dir = args.out or f"{Path(args.config).stem}_out"
            bundle = sweep_config(config, threads=args.threads)
        else:
            if not args.name:
                raise ConfigError("preset name required (or use --list)")
            config = preset_config(args.name)
            config_note = preset_note(args.name)
            out_dir = args.out or f"qbm_{args.name}"
            bundle = _execute(config, args.threads)
            bundle.metadata["preset"] = {"name": args.name, "note": config_note}

        written = emit(bundle, out_dir, formats=formats)
        for path in written:
            print(path)
        print(f"done in {bundle.wall_time:.2f} s", file=sys.stderr)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"numerics error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
