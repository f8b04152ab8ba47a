#!/usr/bin/env python3
"""Measure the vanishing coupling lambda* as a function of temperature.

    python scripts/threshold_scan.py --out threshold_scan.csv
    python scripts/threshold_scan.py --temps 0.25,0.5,1,2,4 --cutoff 0.25

The backflow measure drops to zero above a coupling lambda* that, over
the temperature range probed here, moves only weakly; this script pins
that statement down numerically.  Each temperature costs one bisection
(about ten exact-engine backflow evaluations), so the default scan
takes a couple of minutes.
"""

import argparse
import sys
import time

from qbm import threshold_coupling
from qbm.emit import write_csv


def parse_args(argv):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--cutoff", type=float, default=0.25)
    parser.add_argument("--temps", default="0.25,0.5,1.0,2.0,4.0",
                        help="comma-separated temperatures (T_S = T_E)")
    parser.add_argument("--lam-tol", type=float, default=0.01)
    parser.add_argument("--t-max", type=float, default=50.0)
    parser.add_argument("--n-modes", type=int, default=150)
    parser.add_argument("--out", default=None, help="optional CSV path")
    return parser.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    temps = [float(x) for x in args.temps.split(",") if x.strip()]
    if not temps:
        print("no temperatures given", file=sys.stderr)
        return 2

    table = {"temp": [], "lam_star": [], "bracket_lo": [], "bracket_hi": []}
    print(f"cutoff = {args.cutoff}, lam_tol = {args.lam_tol}")
    print(f"{'T':>8s} {'lam*':>10s} {'bracket':>20s} {'time':>8s}")
    for temp in temps:
        start = time.perf_counter()
        result = threshold_coupling(
            args.cutoff, temp,
            lam_tol=args.lam_tol,
            t_max=args.t_max,
            n_modes=args.n_modes,
        )
        lo, hi = result.bracket
        print(f"{temp:8.3f} {result.lam_star:10.4f} "
              f"[{lo:8.4f}, {hi:8.4f}] {time.perf_counter() - start:7.1f}s")
        table["temp"].append(temp)
        table["lam_star"].append(result.lam_star)
        table["bracket_lo"].append(lo)
        table["bracket_hi"].append(hi)

    spread = max(table["lam_star"]) - min(table["lam_star"])
    print(f"lambda* spread over the scan: {spread:.4f}")

    if args.out:
        write_csv(args.out, table)
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
