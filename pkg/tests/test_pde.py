import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from powerstrips.errors import HeightRangeError, InvalidArgument
from powerstrips.forms import Exponents
from powerstrips.pde import (WaveOperatorSpec, resonance_residual, scan_obstruction,
                             solubility_advisory)

SQRT2 = WaveOperatorSpec.from_ratios(math.sqrt(2), math.sqrt(2))


def oracle(spec, H, taus, c_max=None):
    """Exhaustive integer search over the same box, exact for rational specs."""
    e = spec.exponents
    c_max = H if c_max is None else c_max
    u, v = Fraction(spec.u), Fraction(spec.v)
    D = u.denominator * v.denominator
    U, V = u.numerator * v.denominator, v.numerator * u.denominator

    def axis(k):
        return list(range(-H, 0)) + list(range(1, H + 1)) if k % 2 else list(range(1, H + 1))

    cs = range(-c_max, c_max + 1) if e.p % 2 else range(0, c_max + 1)
    cp = [(c, c ** e.p * D) for c in cs]
    best, hits = None, [0] * len(taus)
    for a in axis(e.n):
        for b in axis(e.m):
            t = a ** e.n * U + b ** e.m * V
            r, c = min((abs(t - q), c) for c, q in cp)
            res = Fraction(r, D)
            key = (res, (a, b, c))
            if best is None or key < best:
                best = key
            g = max(abs(a), abs(b))
            for i, tau in enumerate(taus):
                hits[i] += res * Fraction(g) ** tau < 1
    return best, hits


def test_residual_examples():
    classical = WaveOperatorSpec.from_periods(1, 1, 1)
    assert resonance_residual(classical, 3, 4, 5) == 0
    assert resonance_residual(WaveOperatorSpec.from_ratios(2, 2), 1, 1, 2) == 0
    assert resonance_residual(SQRT2, 6, 3, 8) == pytest.approx(abs(45 * math.sqrt(2) - 64), abs=1e-12)
    assert resonance_residual(SQRT2, 6, 3, 8) == pytest.approx(0.3604, abs=1e-3)
    with pytest.raises(InvalidArgument):
        resonance_residual(classical, 0, 0, 1)


def test_spec_validation():
    for bad in [(0, 1, 1), (1, -2, 1), (1, 1, math.inf), (1, True, 1), (1, "2", 1)]:
        with pytest.raises(InvalidArgument):
            WaveOperatorSpec.from_periods(*bad)
    spec = WaveOperatorSpec.from_periods(Fraction(1, 2), 3, 2)
    assert spec.is_rational and spec.u == 16 and spec.v == Fraction(4, 9)
    assert spec.describe()["periods"] == ["1/2", "3", "2"]


@given(st.fractions(Fraction(1, 10), 10), st.fractions(Fraction(1, 10), 10),
       st.fractions(Fraction(1, 10), 10), st.integers(1, 3))
def test_residual_zero_iff_exact(al, be, ga, lam):
    spec = WaveOperatorSpec.from_periods(al, be, ga)
    # scaling gamma by lam scales both ratios by lam^2
    scaled = WaveOperatorSpec.from_periods(al, be, ga * lam)
    assert (scaled.u, scaled.v) == (spec.u * lam ** 2, spec.v * lam ** 2)
    for a, b, c in [(1, 1, 1), (3, 4, 5), (2, 1, 3)]:
        r = resonance_residual(spec, a, b, c)
        assert isinstance(r, Fraction)
        assert (r == 0) == (a * a * spec.u + b * b * spec.v == c * c)


def test_scan_classical_resonance():
    rep = scan_obstruction(WaveOperatorSpec.from_periods(1, 1, 1), 5, [2.0])
    assert rep.exact_resonance
    assert (rep.best["a"], rep.best["b"], rep.best["c"], rep.best["residual"]) == (3, 4, 5, "0")


def test_scan_sqrt2():
    rep = scan_obstruction(SQRT2, 10, [2.0, 3.0])
    assert {(rep.best["a"], rep.best["b"]), } <= {(6, 3), (3, 6)}
    assert rep.best["c"] == 8
    assert rep.best["residual"] == pytest.approx(0.3604, abs=1e-3)
    assert not rep.exact_resonance and rep.error_bar > 0


def test_scan_sqrt2_unbounded_c():
    # letting c exceed H finds the much closer (9, 10, 16)
    rep = scan_obstruction(SQRT2, 10, [2.0], c_max=40)
    assert (rep.best["a"], rep.best["b"], rep.best["c"]) == (9, 10, 16)
    assert rep.best["residual"] < 0.03


@pytest.mark.parametrize("seed", range(10))
def test_scan_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    ex = [(2, 2, 2), (1, 2, 3), (3, 2, 2), (2, 2, 1), (1, 1, 2)][seed % 5]
    e = Exponents(*ex)
    u = Fraction(int(rng.integers(1, 30)), int(rng.integers(1, 30)))
    v = Fraction(int(rng.integers(1, 30)), int(rng.integers(1, 30)))
    spec = WaveOperatorSpec.from_ratios(u, v, e)
    H = 50 if ex == (2, 2, 2) else 15
    taus = [1.5, 2.0, 3.0]
    rep = scan_obstruction(spec, H, taus)
    (res, trip), hits = oracle(spec, H, taus)
    assert Fraction(rep.best["residual"]) == res
    a, b, c = rep.best["a"], rep.best["b"], rep.best["c"]
    assert resonance_residual(spec, a, b, c) == res
    assert abs(c) <= H
    if e.p % 2:
        assert (a, b, c) == trip
    assert [h["count"] for h in rep.hits] == hits
    assert rep.exact_resonance == (res == 0)


@given(st.floats(0.1, 10), st.floats(0.1, 10), st.integers(1, 40))
def test_hits_monotone_in_tau(u, v, H):
    rep = scan_obstruction(WaveOperatorSpec.from_ratios(u, v), H, [1.5, 2.0, 3.0, 5.0])
    counts = [h["count"] for h in rep.hits]
    assert counts == sorted(counts, reverse=True)


def test_scan_threads_identical():
    one = scan_obstruction(SQRT2, 300, [2.0, 3.0], threads=1)
    many = scan_obstruction(SQRT2, 300, [2.0, 3.0], threads=4)
    assert one.to_json() == many.to_json()


def test_scan_guards():
    with pytest.raises(InvalidArgument):
        scan_obstruction(SQRT2, 10, [1.0])
    with pytest.raises(InvalidArgument):
        scan_obstruction(SQRT2, 10, [])
    with pytest.raises(InvalidArgument):
        scan_obstruction(SQRT2, 0, [2.0])
    with pytest.raises(HeightRangeError):
        scan_obstruction(WaveOperatorSpec.from_ratios(1, 1, Exponents(7, 7, 7)), 1000, [2.0])


def test_report_json_shape():
    d = json.loads(scan_obstruction(SQRT2, 10, [2.0]).to_json())
    assert set(d) >= {"H", "best", "hits", "exact_resonance"}
    assert set(d["best"]) == {"a", "b", "c", "residual"}


def test_advisory_obstruction():
    adv = solubility_advisory(WaveOperatorSpec.from_periods(1, 1, 1), 10, 2.0)
    assert adv["status"] == "obstruction-present" and adv["flags"]["exact_resonance"]
    assert "almost every" in adv["context"]


def test_advisory_sqrt2():
    adv = solubility_advisory(SQRT2, 1000, 3.0)
    assert adv["status"] in ("no-obstruction-detected", "near-resonances-present")
    assert adv["flags"]["heuristic"] is True
    assert adv["flags"]["hits_total"] == adv["report"]["hits"][0]["count"]
    if adv["status"] == "no-obstruction-detected":
        assert "not a proof" in adv["text"]
    assert "convergent" in adv["context"]
