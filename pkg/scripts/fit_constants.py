"""Measure the empirical constants that the test-suite checks as fitted windows.

Writes tests/fixtures/fitted_constants.json. Every quantity is deterministic
(fixed seeds), so re-running reproduces the file exactly.

    python scripts/fit_constants.py [--out PATH]
"""
from __future__ import annotations

import argparse
import json
import math
from pathlib import Path

import numpy as np

from powerstrips import __version__
from powerstrips.arith import build_tables, divisor_summatory, totient_power_sum
from powerstrips.enumeration import dyadic_counts, sample_restricted_pairs
from powerstrips.forms import Exponents, PowerLaw, height
from powerstrips.geometry import (Ball, StripUnion, angle_between, c_bounds_window, c_range,
                                  line_spacing, normalised_union_measure,
                                  pair_intersection_measure, quasi_independence_ratio)

SEED = 20240601
BALL = Ball(0.5, 0.5, 0.2, 0.25)
PAIR_EXPONENTS = [(1, 1, 1), (2, 2, 2), (2, 2, 1)]


def window(values) -> dict:
    lo, hi = float(min(values)), float(max(values))
    return {"min": lo, "max": hi, "ratio": hi / lo if lo > 0 else math.inf}


def fit_dyadic() -> dict:
    e22, e24 = Exponents(2, 2, 1), Exponents(2, 4, 1)
    alpha = [dyadic_counts(e22, t).alpha / 2.0 ** (2 * t) for t in range(4, 13)]
    beta = [dyadic_counts(e24, t).beta / 2.0 ** (3 * t) for t in range(4, 13)]
    return {"alpha_22_over_4t": window(alpha), "beta_24_over_8t": window(beta)}


def fit_intersect(rng) -> dict:
    out = {}
    psi = PowerLaw(2.0)
    for ex in PAIR_EXPONENTS:
        e = Exponents(*ex)
        pairs = sample_restricted_pairs(e, 2 ** 10, 2 ** 20, 100, rng)
        vals = [normalised_union_measure((q.a, q.b), e, psi, BALL) for q in pairs]
        out[",".join(map(str, ex))] = window(vals)
    return out


def fit_determinant(rng) -> dict:
    out = {}
    for ex in [(1, 1, 1), (2, 2, 2), (2, 4, 4)]:
        e = Exponents(*ex)
        pairs = sample_restricted_pairs(e, 2 ** 4, 2 ** 24, 400, rng)
        vals = []
        for q1, q2 in zip(pairs[::2], pairs[1::2]):
            if (q1.a, q1.b) == (q2.a, q2.b):
                continue
            info = angle_between((q1.a, q1.b), (q2.a, q2.b), e, BALL.r)
            vals.append((info.h1 * info.h2) ** (1.0 / e.k) * info.sin_alpha)
        out[",".join(map(str, ex))] = {"min": float(min(vals)), "samples": len(vals)}
    return out


def fit_spacing(rng) -> dict:
    out = {}
    for ex in [(1, 1, 2), (2, 2, 2), (2, 2, 3)]:
        e = Exponents(*ex)
        vals = []
        for q in sample_restricted_pairs(e, 2 ** 8, 2 ** 20, 60, rng):
            lo, hi = c_bounds_window(q.h, e.p, BALL.eps)
            for c in range(int(math.ceil(lo)), int(math.floor(hi)) + 1):
                vals.append(line_spacing((q.a, q.b), e, c) * q.h / c ** (e.p - 1))
        out[",".join(map(str, ex))] = window(vals)
    return out


def fit_large_angle(rng) -> dict:
    """Overlap estimate over the product scale for large-angle pairs."""
    e = Exponents(1, 1, 1)
    psi = PowerLaw(1.0)
    pairs = sample_restricted_pairs(e, 2 ** 3, 2 ** 6, 400, rng)
    vals = []
    for q1, q2 in zip(pairs[::2], pairs[1::2]):
        if (q1.a, q1.b) == (q2.a, q2.b):
            continue
        info = angle_between((q1.a, q1.b), (q2.a, q2.b), e, BALL.r)
        if info.regime != "large":
            continue
        est, _ = pair_intersection_measure(StripUnion(q1.a, q1.b, e, psi),
                                           StripUnion(q2.a, q2.b, e, psi), BALL,
                                           samples=65536, seed=SEED, stream=len(vals))
        scale = BALL.area * psi(q1.h) * psi(q2.h) / (q1.h * q2.h) ** (1 - 1 / e.p)
        vals.append(est / scale)
        if len(vals) == 50:
            break
    return {"max": float(max(vals)), "samples": len(vals)}


def fit_interval_constant(rng) -> dict:
    """Observed C in length <= 2 C r h^(1/p) / eps^(1 - 1/p)."""
    out = {}
    for ex in [(1, 1, 2), (2, 2, 2), (2, 2, 3)]:
        e = Exponents(*ex)
        vals = []
        for q in sample_restricted_pairs(e, 2 ** 10, 2 ** 20, 100, rng):
            length = c_range((q.a, q.b), e, BALL).interval_length
            vals.append(length * BALL.eps ** (1 - 1 / e.p) / (2 * BALL.r * q.h ** (1 / e.p)))
        out[",".join(map(str, ex))] = window(vals)
    return out


def fit_arith() -> dict:
    worst = max(abs(divisor_summatory(Q)[0] - Q * math.log(Q)) / Q for Q in range(1, 10 ** 4 + 1))
    T = build_tables(10 ** 6)
    scaled = {}
    for z in (0.5, 1.0, 2.0, 3.5):
        row = {}
        for k in range(2, 7):
            Q = 10 ** k
            val, main = totient_power_sum(z, Q, T)
            row[str(Q)] = abs(float(val) - main) / Q ** z
        scaled[format(z, "g")] = row
    return {"divisor_summatory_worst_over_Q": worst, "totient_scaled_errors": scaled}


def fit_quasi() -> dict:
    e = Exponents(1, 1, 1)
    ratios = {}
    for k in range(4, 9):
        q = quasi_independence_ratio(e, PowerLaw(1.0), BALL, 2 ** k, samples=65536, seed=SEED)
        ratios[str(2 ** k)] = q.ratio
    return {"ratios": ratios}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1]
                                         / "tests" / "fixtures" / "fitted_constants.json"))
    args = ap.parse_args(argv)
    rng = np.random.default_rng(SEED)
    data = {
        "version": __version__,
        "seed": SEED,
        "ball": [BALL.x0, BALL.y0, BALL.r, BALL.eps],
        "dyadic": fit_dyadic(),
        "intersect": fit_intersect(rng),
        "determinant": fit_determinant(rng),
        "spacing": fit_spacing(rng),
        "large_angle": fit_large_angle(rng),
        "interval_constant": fit_interval_constant(rng),
        "arith": fit_arith(),
        "quasi": fit_quasi(),
    }
    Path(args.out).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    print(json.dumps(data, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
