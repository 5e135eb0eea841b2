"""Sum-based critical exponent s* against 1 + min(1, S/(tau+1)) over a tau grid.

    python3 scripts/critical_exponent_sweep.py [--H-log2 20] [--detector slope|block]

Prints one CSV row per (exponents, tau).
"""
from __future__ import annotations

import argparse
import csv
import sys
import time

from powerstrips.forms import Exponents, dimension_formula, regime_classify
from powerstrips.fractal import critical_exponent_from_sums

EXPONENTS = [(1, 1, 1), (2, 2, 2), (2, 4, 4), (3, 3, 2)]
TAUS = [1.25, 1.5, 2.0, 3.0, 5.0]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--H-log2", type=int, default=20)
    ap.add_argument("--detector", choices=("slope", "block"), default="slope")
    args = ap.parse_args(argv)
    wr = csv.writer(sys.stdout, lineterminator="\n")
    wr.writerow(["n", "m", "p", "tau", "s_star", "formula", "abs_diff", "seconds"])
    for ex in EXPONENTS:
        e = Exponents(*ex)
        if not regime_classify(e).dimension_applicable:
            continue
        for tau in TAUS:
            t0 = time.perf_counter()
            s = critical_exponent_from_sums(e, tau, H_max=2 ** args.H_log2, detector=args.detector)
            f = dimension_formula(e, tau)
            wr.writerow([*ex, tau, f"{s:.4f}", f"{f:.4f}", f"{abs(s - f):.4f}",
                         f"{time.perf_counter() - t0:.2f}"])


if __name__ == "__main__":
    main()
