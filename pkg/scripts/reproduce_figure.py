#!/usr/bin/env python3
"""Regenerate the packaged figure datasets.

    python scripts/reproduce_figure.py fig4a fig4c --out data
    python scripts/reproduce_figure.py --all --out data --threads 4

Each preset lands in <out>/<name>/ as CSV plus a metadata sidecar; add
--format to request json or svg as well.  The strong-coupling sweeps
(fig3*, fig4c, fig4d) and the witness sweeps (fig6*) dominate the
runtime of --all.
"""

import argparse
import sys
import time

from qbm.cli import main as qbm_main
from qbm.presets import preset_names, preset_note


def parse_args(argv):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("names", nargs="*", help="preset names (see --list)")
    parser.add_argument("--all", action="store_true", help="run every preset")
    parser.add_argument("--list", action="store_true",
                        help="list presets and exit")
    parser.add_argument("--out", default="data", help="output root directory")
    parser.add_argument("--format", default="csv",
                        help="comma-separated: csv,json,svg")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker processes for sweep presets")
    return parser.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    if args.list:
        for name in preset_names():
            print(f"{name:8s} {preset_note(name)}")
        return 0

    names = list(preset_names()) if args.all else args.names
    if not names:
        print("nothing to do: pass preset names, --all or --list",
              file=sys.stderr)
        return 2

    failures = []
    for name in names:
        start = time.perf_counter()
        code = qbm_main([
            "preset", name,
            "--out", f"{args.out}/{name}",
            "--format", args.format,
            "--threads", str(args.threads),
        ])
        status = "ok" if code == 0 else f"exit {code}"
        print(f"{name:8s} {status} ({time.perf_counter() - start:.1f}s)",
              file=sys.stderr)
        if code != 0:
            failures.append(name)

    if failures:
        print(f"failed: {', '.join(failures)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
