import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from powerstrips.arith import (ZETA2, build_tables, coprime_count, coprime_errors,
                               coprime_in_range, divisor_summatory, falling_factorial_ratios,
                               mobius_weighted_sums, pochhammer_bound_check, squarefree_divisors,
                               totient_power_sum)
from powerstrips.errors import InvalidArgument, ResourceLimitError


def trial_division(q):
    f, d = {}, 2
    while d * d <= q:
        while q % d == 0:
            f[d] = f.get(d, 0) + 1
            q //= d
        d += 1
    if q > 1:
        f[q] = f.get(q, 0) + 1
    return f


def naive_mu_phi_d(q):
    f = trial_division(q)
    mu = 0 if any(e > 1 for e in f.values()) else (-1) ** len(f)
    phi = sum(1 for k in range(1, q + 1) if math.gcd(k, q) == 1)
    d = sum(1 for k in range(1, q + 1) if q % k == 0)
    return mu, phi, d


def test_base_case():
    t = build_tables(1)
    assert (t.mobius[1], t.totient[1], t.divisor_count[1]) == (1, 1, 1)


@pytest.mark.parametrize("q,expect", [(6, (1, 2, 4)), (30, (-1, 8, 8))])
def test_small_values(q, expect):
    t = build_tables(30)
    assert (t.mobius[q], t.totient[q], t.divisor_count[q]) == expect


def test_tables_match_trial_division():
    t = build_tables(1000)
    for q in range(1, 1001):
        assert (t.mobius[q], t.totient[q], t.divisor_count[q]) == naive_mu_phi_d(q), q


def test_tables_read_only():
    t = build_tables(10)
    with pytest.raises(ValueError):
        t.mobius[2] = 5


def test_multiplicativity_and_mobius_identity(tables_1e4):
    t = tables_1e4
    for u in range(1, 100):
        for v in range(1, 100):
            if math.gcd(u, v) == 1:
                assert t.totient[u * v] == t.totient[u] * t.totient[v]
                assert t.mobius[u * v] == t.mobius[u] * t.mobius[v]
                assert t.divisor_count[u * v] == t.divisor_count[u] * t.divisor_count[v]
    # sum_{e | q} mu(e) = [q == 1], via a Dirichlet-style scatter
    acc = np.zeros(t.limit + 1, dtype=np.int64)
    for e in range(1, t.limit + 1):
        acc[e::e] += t.mobius[e]
    assert acc[1] == 1 and not acc[2:].any()
    q = np.arange(2, t.limit + 1)
    assert np.all(t.totient[q] < q) and np.all(t.divisor_count[q] >= 2)


def test_factor(tables_1e4):
    assert tables_1e4.factor(360) == {2: 3, 3: 2, 5: 1}
    with pytest.raises(InvalidArgument):
        tables_1e4.factor(0)


def test_build_errors():
    with pytest.raises(InvalidArgument):
        build_tables(0)
    with pytest.raises(ResourceLimitError):
        build_tables(10 ** 9)


@pytest.mark.parametrize("t,Q,gamma,eps", [(1, 7, 7, 0.0), (6, 10, 3, -1 / 3), (4, 8, 4, 0.0)])
def test_coprime_count_examples(t, Q, gamma, eps):
    g, e = coprime_count(t, Q)
    assert g == gamma
    assert e == pytest.approx(eps, abs=1e-15)


@given(st.integers(1, 400), st.integers(0, 400))
def test_coprime_count_oracle(t, Q):
    g, eps = coprime_count(t, Q)
    assert g == sum(1 for q in range(1, Q + 1) if math.gcd(t, q) == 1)
    d = sum(1 for k in range(1, t + 1) if t % k == 0)
    assert abs(eps) <= d


@given(st.integers(1, 300), st.integers(0, 200), st.integers(0, 200))
def test_coprime_in_range_oracle(t, lo, width):
    hi = lo + width
    assert coprime_in_range(t, lo, hi) == sum(1 for q in range(lo + 1, hi + 1) if math.gcd(t, q) == 1)


def test_coprime_errors_vectorised(tables_1e4):
    for t in (1, 6, 30, 97, 210):
        errs = coprime_errors(t, 500, tables_1e4)
        for Q in (0, 1, 17, 499, 500):
            assert errs[Q] == pytest.approx(coprime_count(t, Q, tables_1e4)[1], abs=1e-9)


def test_squarefree_divisors():
    assert sorted(squarefree_divisors(12)) == [(1, 1), (2, -1), (3, -1), (6, 1)]
    assert squarefree_divisors(1) == [(1, 1)]


def test_coprime_errors_rejects_bad_t():
    with pytest.raises(InvalidArgument):
        coprime_count(0, 5)


@pytest.mark.parametrize("z,Q,total,main", [
    (1, 1, 1, 3 / math.pi ** 2),
    (1, 10, 32, 100 / (2 * ZETA2)),
    (2, 10, 217, 1000 / (3 * ZETA2)),
])
def test_totient_power_sum_examples(z, Q, total, main):
    t = build_tables(10)
    s, m = totient_power_sum(z, Q, t)
    assert s == total and isinstance(s, int)
    assert m == pytest.approx(main, rel=1e-14)


def test_totient_power_sum_fractional(tables_1e4):
    s, _ = totient_power_sum(0.5, 5000, tables_1e4)
    ref = math.fsum(q ** -0.5 * int(tables_1e4.totient[q]) for q in range(1, 5001))
    assert s == pytest.approx(ref, rel=1e-14)


def test_totient_power_sum_big_integer_path():
    t = build_tables(3000)
    s, _ = totient_power_sum(6, 3000, t)
    assert s == sum(q ** 5 * int(t.totient[q]) for q in range(1, 3001))


def test_totient_power_sum_rejects():
    t = build_tables(10)
    with pytest.raises(InvalidArgument):
        totient_power_sum(0, 5, t)
    with pytest.raises(InvalidArgument):
        totient_power_sum(1, 11, t)


@pytest.mark.parametrize("Q,total", [(1, 1), (10, 27), (100, 482)])
def test_divisor_summatory_examples(Q, total):
    s, main = divisor_summatory(Q)
    assert s == total
    assert main == pytest.approx(Q * math.log(Q))


def test_divisor_summatory_fitted_bound(tables_1e4, fitted):
    d = tables_1e4.divisor_count
    running = np.cumsum(d[1:].astype(np.int64))
    Q = np.arange(1, 10 ** 4 + 1)
    worst = np.max(np.abs(running - Q * np.log(Q)) / Q)
    assert worst <= 2
    assert worst == pytest.approx(fitted["arith"]["divisor_summatory_worst_over_Q"])
    for q in (1, 2, 999, 10 ** 4):
        assert divisor_summatory(q)[0] == running[q - 1]


def test_mobius_sums_rational_oracle():
    t = build_tables(10)
    s1, s2 = mobius_weighted_sums(10, t)
    r1 = sum(Fraction(int(t.mobius[e]), e) for e in range(1, 11))
    r2 = sum(Fraction(int(t.mobius[e]), e * e) for e in range(1, 11))
    assert s1 == pytest.approx(float(r1), rel=1e-15)
    assert s2 == pytest.approx(float(r2), rel=1e-15)
    assert s1 == pytest.approx(0.0904762, abs=1e-6)
    assert mobius_weighted_sums(1, t) == (1.0, 1.0)


def test_mobius_sums_tail_bound():
    Q = 10 ** 6
    t = build_tables(Q)
    s1, s2 = mobius_weighted_sums(Q, t)
    assert abs(s1) <= 1
    assert abs(s2 - 6 / math.pi ** 2) <= 1e-6
    assert abs(s2 - 6 / math.pi ** 2) <= 1 / Q


@pytest.mark.xfail(strict=True, reason="scaled error at Q=1e3 exceeds 4x its Q=1e2 value; "
                                        "the O(Q^z) constant fitted at Q=1e2 is too small")
def test_totient_scaled_error_fitted_at_100(fitted):
    for z in (0.5, 1.0, 2.0, 3.5):
        row = fitted["arith"]["totient_scaled_errors"][format(z, "g")]
        C = row["100"]
        for Q in ("1000", "10000", "100000", "1000000"):
            assert row[Q] <= 4 * C, (z, Q)


def test_totient_scaled_error_bounded(fitted):
    # the weaker statement that does hold: one constant bounds every decade
    for z, row in fitted["arith"]["totient_scaled_errors"].items():
        assert max(row.values()) <= 4 * max(row["100"], row["1000"]), z


def test_pochhammer_examples():
    assert pochhammer_bound_check(0.5, 1) == pytest.approx(0.5 * 2 ** 1.5 / math.exp(2.25))
    assert pochhammer_bound_check(2 / 3, 10 ** 4) <= 1
    for g in (0.1, 0.7, 0.99):
        assert falling_factorial_ratios(g, 1)[0] == pytest.approx(g)


def test_falling_factorial_against_product():
    g = 0.37
    vals = falling_factorial_ratios(g, 30)
    for t in (1, 5, 30):
        ref = abs(math.prod(g - i for i in range(t)) / math.factorial(t))
        assert vals[t - 1] == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("gamma", [0.0, 1.0, -0.2, 1.5])
def test_pochhammer_rejects(gamma):
    with pytest.raises(InvalidArgument):
        pochhammer_bound_check(gamma, 10)
