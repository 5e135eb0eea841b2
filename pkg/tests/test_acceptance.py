"""One test per acceptance criterion, each at its stated tolerance.

Every test prints a single ``ACCEPTANCE <k> PASS|FAIL: ...`` line, visible
even under output capture.
"""
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from powerstrips.arith import build_tables, coprime_errors, pochhammer_bound_check, totient_power_sum
from powerstrips.enumeration import dyadic_counts, find_solutions, sample_restricted_pairs
from powerstrips.forms import (Exponents, PowerLaw, convergence_classify_power_law,
                               dimension_formula, hausdorff_sum_partial, iroot,
                               lebesgue_sum_partial)
from powerstrips.fractal import critical_exponent_from_sums
from powerstrips.geometry import (Ball, Strip, c_range, normalised_union_measure,
                                  quasi_independence_ratio, strip_ball_measure,
                                  strip_ball_measure_mc)
from powerstrips.pde import WaveOperatorSpec, scan_obstruction

BALL = Ball(0.5, 0.5, 0.2, 0.25)


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {k} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return emit


def test_acceptance_01_groshev_dimension(report):
    t0 = time.perf_counter()
    s = critical_exponent_from_sums(Exponents(1, 1, 1), 3.0, H_max=2 ** 20)
    dt = time.perf_counter() - t0
    report(1, abs(s - 1.75) <= 0.05 and dt <= 60, f"s* = {s:.4f} (target 1.75 +- 0.05), {dt:.1f} s")


def test_acceptance_02_classical_case(report):
    e = Exponents(2, 2, 2)
    dim = dimension_formula(e, 2)
    cls, thr = convergence_classify_power_law(e, 2)
    s = critical_exponent_from_sums(e, 2.0, H_max=2 ** 20)
    ok = dim == 1.5 and thr == 0.5 and abs(s - 1.5) <= 0.05
    report(2, ok, f"formula {dim}, threshold {thr}, s* = {s:.4f} (target 1.5 +- 0.05)")


def test_acceptance_03_coprime_error_bound(report):
    t0 = time.perf_counter()
    T = build_tables(10 ** 4)
    violations = 0
    for t in range(1, 201):
        eps = np.abs(coprime_errors(t, 10 ** 4, T))
        violations += int(np.sum(eps > int(T.divisor_count[t])))
    dt = time.perf_counter() - t0
    report(3, violations == 0 and dt <= 30, f"{violations} violations over t <= 200, Q <= 1e4, {dt:.1f} s")


def test_acceptance_04_totient_power_sums(report):
    T = build_tables(10 ** 6)
    parts, ok = [], True
    for z in (0.5, 1.0, 2.0):
        err = {}
        for Q in (10 ** 2, 10 ** 6):
            val, main = totient_power_sum(z, Q, T)
            err[Q] = abs(float(val) - main) / Q ** z
        ok &= err[10 ** 6] <= 4 * err[10 ** 2]
        parts.append(f"z={z:g}: {err[10 ** 6]:.3g} vs 4 x {err[10 ** 2]:.3g}")
    report(4, ok, "; ".join(parts))


def test_acceptance_05_dyadic_counts(report):
    a22 = [dyadic_counts(Exponents(2, 2, 1), t).alpha / 2.0 ** (2 * t) for t in range(4, 13)]
    b24 = [dyadic_counts(Exponents(2, 4, 1), t).beta / 2.0 ** (3 * t) for t in range(4, 13)]
    r1, r2 = max(a22) / min(a22), max(b24) / min(b24)
    report(5, min(a22) > 0 and min(b24) > 0 and r1 <= 4 and r2 <= 4,
           f"alpha_t/4^t window ratio {r1:.4f}, beta_t/8^t window ratio {r2:.4f} (limit 4)")


def _oracle_solutions(x, y, e, psi, H):
    a = np.arange(1, iroot(H, e.n) + 1, dtype=np.int64)
    b = np.arange(1, iroot(H, e.m) + 1, dtype=np.int64)
    A, B = np.meshgrid(a ** e.n, b ** e.m, indexing="ij")
    ai, bi = np.meshgrid(a, b, indexing="ij")
    h = np.maximum(A, B)
    keep = h <= H
    A, B, h, ai, bi = A[keep], B[keep], h[keep], ai[keep], bi[keep]
    t = A.astype(np.float64) * x + B.astype(np.float64) * y
    cs = np.arange(0, iroot(2 * H, e.p) + 3, dtype=np.int64)
    cp = (cs ** e.p).astype(np.float64)
    best_r = np.full(t.shape, np.inf)
    best_c = np.zeros(t.shape, dtype=np.int64)
    for c, q in zip(cs, cp):  # ascending c with strict improvement: ties go to the smaller c
        r = np.abs(t - q)
        better = r < best_r
        best_r = np.where(better, r, best_r)
        best_c = np.where(better, c, best_c)
    hit = best_r < np.asarray(psi(h.astype(np.float64)))
    rows = sorted(zip(h[hit].tolist(), ai[hit].tolist(), bi[hit].tolist(),
                      best_c[hit].tolist(), best_r[hit].tolist()))
    return rows


def _oracle_sum(e, H, term):
    a = np.arange(1, iroot(H, e.n) + 1, dtype=np.int64)
    total = []
    for ai in a:
        b = np.arange(1, iroot(H, e.m) + 1, dtype=np.int64)
        h = np.maximum(int(ai) ** e.n, b ** e.m)
        h = h[h <= H].astype(np.float64)
        total.extend(term(h).tolist())
    return math.fsum(total)


# exponent triples with the largest H that keeps the triple-loop oracle cheap
ORACLE_CASES = [((1, 1, 1), 150), ((2, 2, 2), 1000), ((1, 2, 3), 300), ((3, 3, 4), 1000),
                ((2, 1, 1), 200), ((2, 3, 2), 1000), ((1, 1, 2), 200), ((4, 2, 3), 1000)]


def test_acceptance_06_oracle_equivalence(report):
    rng = np.random.default_rng(20240606)
    mismatches = 0
    for i in range(200):
        ex, H_max = ORACLE_CASES[i % len(ORACLE_CASES)]
        e = Exponents(*ex)
        H = int(rng.integers(1, H_max + 1))
        x, y = rng.random(2)
        psi = PowerLaw(float(rng.uniform(0.2, 3.0)))
        got = [(s.h, s.a, s.b, s.c, s.residual) for s in find_solutions(x, y, e, psi, H)]
        mismatches += got != _oracle_solutions(x, y, e, psi, H)
    worst = 0.0
    for ex, H, tau, s in [((1, 1, 1), 2 ** 12, 1.5, 1.8), ((2, 2, 2), 2 ** 16, 1.0, 1.5),
                          ((1, 2, 3), 2 ** 16, 0.7, 1.3), ((2, 4, 4), 2 ** 16, 2.0, 1.2),
                          ((3, 2, 1), 2 ** 16, 0.4, 1.9)]:
        e, psi = Exponents(*ex), PowerLaw(tau)
        leb = _oracle_sum(e, H, lambda h: psi(h) / h ** (1 - 1 / e.p))
        hau = _oracle_sum(e, H, lambda h: (psi(h) / h) ** (s - 1) * h ** (1 / e.p))
        worst = max(worst, abs(lebesgue_sum_partial(e, psi, H).total / leb - 1),
                    abs(hausdorff_sum_partial(e, psi, s, H).total / hau - 1))
    report(6, mismatches == 0 and worst <= 1e-12,
           f"{mismatches}/200 solution mismatches; worst sum relative error {worst:.2e}")


def test_acceptance_07_geometry(report):
    rng = np.random.default_rng(77)
    outside = 0
    for i in range(100):
        e = Exponents(*[(1, 1, 1), (2, 2, 2), (2, 3, 1), (1, 1, 2)][i % 4])
        while True:
            a, b = (int(v) for v in rng.integers(1, 12, size=2))
            cr = c_range((a, b), e, BALL)
            if cr.count:
                break
        c = int(rng.integers(cr.lo, cr.hi + 1))
        norm = math.hypot(a ** e.n, b ** e.m)
        s = Strip(a, b, c, e, float(rng.uniform(0.01, 1.5)) * BALL.r * norm)
        exact = strip_ball_measure(s, BALL)
        mc, ci = strip_ball_measure_mc(s, BALL, samples=10 ** 6, seed=7, stream=i)
        outside += abs(mc - exact) > 3 * ci
    ratios = []
    for ex in [(1, 1, 1), (2, 2, 2), (2, 2, 1)]:
        e = Exponents(*ex)
        vals = [normalised_union_measure((q.a, q.b), e, PowerLaw(2.0), BALL)
                for q in sample_restricted_pairs(e, 2 ** 10, 2 ** 20, 100, rng)]
        ratios.append(max(vals) / min(vals))
    report(7, outside == 0 and max(ratios) <= 200,
           f"{outside}/100 MC configurations outside 3 CI; intersect window ratios "
           + ", ".join(f"{r:.3g}" for r in ratios) + " (limit 200)")


def test_acceptance_08_quasi_independence(report):
    e, psi = Exponents(1, 1, 1), PowerLaw(1.0)
    ratios = [quasi_independence_ratio(e, psi, BALL, 2 ** k, samples=65536, seed=20240601).ratio
              for k in range(4, 9)]
    growth = [b / a for a, b in zip(ratios, ratios[1:])]
    ok = all(math.isfinite(r) and r > 0 for r in ratios) and max(growth) <= 2
    report(8, ok, "ratios " + ", ".join(f"{r:.4f}" for r in ratios)
           + f"; max growth {max(growth):.3f} (limit 2)")


def test_acceptance_09_regime_gate(report):
    e = Exponents(3, 3, 4)
    parts, ok = [], True
    for tau in (0.1, 0.5, 1.0):
        ser = lebesgue_sum_partial(e, PowerLaw(tau), 2 ** 24)
        rel = ser.last_block_increment() / ser.total
        ok &= rel < 1e-3
        parts.append(f"tau={tau:g}: last block / total = {rel:.3g}")
    report(9, ok, "; ".join(parts) + " (limit 1e-3)")


def test_acceptance_10_pde_scan(report):
    classical = scan_obstruction(WaveOperatorSpec.from_periods(1, 1, 1), 5, [2.0])
    b = classical.best
    ok1 = classical.exact_resonance and {(b["a"], b["b"], b["c"])} <= {(3, 4, 5), (4, 3, 5)}
    root2 = scan_obstruction(WaveOperatorSpec.from_ratios(math.sqrt(2), math.sqrt(2)), 10, [2.0])
    r = root2.best
    ok2 = (abs(r["residual"] - 0.3604) <= 1e-3 and {r["a"], r["b"]} == {3, 6} and r["c"] == 8)
    report(10, ok1 and ok2, f"classical best ({b['a']},{b['b']},{b['c']}) exact={classical.exact_resonance}; "
           f"sqrt2 best ({r['a']},{r['b']},{r['c']}) residual {r['residual']:.6f}")


def test_acceptance_11_pochhammer(report):
    worst = {g: pochhammer_bound_check(g, 10 ** 4) for g in [round(0.1 * i, 1) for i in range(1, 10)]}
    bad = [g for g, v in worst.items() if v > 1]
    report(11, not bad, f"worst ratio {max(worst.values()):.4f} over gamma 0.1..0.9, t <= 1e4; "
           f"violations {bad}")


CLI_RUNS = [
    ["classify", "--n", "2", "--m", "2", "--p", "2", "--tau", "2"],
    ["sums", "--n", "2", "--m", "2", "--p", "2", "--tau", "1", "--H", "65536"],
    ["solutions", "--x", "0.41421356", "--y", "0.5", "--n", "2", "--m", "2", "--p", "2", "--tau", "1",
     "--H", "10000"],
    ["strips", "--tau", "1", "--ball", "0.5,0.5,0.2,0.25", "--a", "3", "--b", "5", "--quasi",
     "--H", "64", "--seed", "11"],
    ["boxdim", "--n", "2", "--m", "2", "--p", "2", "--tau", "2", "--j-min", "4", "--j-max", "10",
     "--H", "65536"],
    ["pde", "--classical", "--u", "1.4142135623730951", "--v", "2.5", "--H", "300"],
]


def test_acceptance_12_determinism(report):
    differing = []
    for argv in CLI_RUNS:
        outs = [subprocess.run([sys.executable, "-m", "powerstrips.cli", *argv, "--threads", str(t)],
                               capture_output=True, check=True).stdout for t in (1, 8, 1)]
        if len(set(outs)) != 1:
            differing.append(argv[0])
    report(12, not differing, f"{len(CLI_RUNS)} CLI runs at 1, 8, 1 threads; differing: {differing}")
