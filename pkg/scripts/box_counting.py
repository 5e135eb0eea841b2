"""Box-counting slopes of truncated limsup sets next to the sum-based s*.

    python3 scripts/box_counting.py [--j-max-111 12] [--j-max-222 16] [--json]

The matched-band cover is used throughout; (2,2,2) needs finer scales than
(1,1,1) because its attained heights are squares.
"""
from __future__ import annotations

import argparse
import json

from powerstrips.forms import Exponents, dimension_formula
from powerstrips.fractal import critical_exponent_from_sums, estimate_dimension


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--j-max-111", type=int, default=12)
    ap.add_argument("--j-max-222", type=int, default=16)
    ap.add_argument("--taus", default="1.5,2,3,50")
    ap.add_argument("--json", action="store_true", help="print full reports")
    args = ap.parse_args(argv)
    taus = [float(t) for t in args.taus.split(",")]
    print(f"{'e':>9} {'tau':>5} {'slope':>7} {'s*':>7} {'formula':>8}  counts")
    for ex, j_max in [((1, 1, 1), args.j_max_111), ((2, 2, 2), args.j_max_222)]:
        e = Exponents(*ex)
        for tau in taus:
            rep = estimate_dimension(e, tau, range(4, j_max + 1))
            s = critical_exponent_from_sums(e, tau, H_max=2 ** 20)
            if args.json:
                print(rep.to_json())
                continue
            print(f"{str(ex):>9} {tau:5g} {rep.slope:7.3f} {s:7.3f} {dimension_formula(e, tau):8.3f}  "
                  f"{rep.counts}")


if __name__ == "__main__":
    main()
