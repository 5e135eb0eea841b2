"""Resonance scans for the periodic wave operator.

    python3 scripts/pde_scan.py [--H 1000] [--threads 1]

Compares an exactly resonant torus, a quadratic-irrational one and a few
random float ratios: best residual, hit counts per tau, advisory status.
"""
from __future__ import annotations

import argparse
import math

import numpy as np

from powerstrips.pde import WaveOperatorSpec, scan_obstruction, solubility_advisory

TAUS = [1.5, 2.0, 3.0]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--H", type=int, default=1000)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    specs = [("alpha=beta=gamma=1", WaveOperatorSpec.from_periods(1, 1, 1)),
             ("u=v=sqrt2", WaveOperatorSpec.from_ratios(math.sqrt(2), math.sqrt(2)))]
    specs += [(f"random #{i}", WaveOperatorSpec.from_ratios(*rng.uniform(0.5, 3.0, 2)))
              for i in range(3)]
    for name, spec in specs:
        rep = scan_obstruction(spec, args.H, TAUS, args.threads).to_dict()
        adv = solubility_advisory(spec, args.H, TAUS[-1], args.threads)
        hits = ", ".join(f"tau={h['tau']:g}: {h['count']}" for h in rep["hits"])
        b = rep["best"]
        print(f"{name:>20}  best ({b['a']},{b['b']},{b['c']}) residual {b['residual']}  [{hits}]  "
              f"{adv['status']}")


if __name__ == "__main__":
    main()
