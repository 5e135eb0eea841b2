"""Sieved arithmetic functions and the coprimality/totient summatory identities.

``divisor_count`` is the number-of-divisors function d(q), not the sum of
divisors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidArgument, ResourceLimitError

ZETA2 = math.pi ** 2 / 6

# ~40 bytes/entry across the arrays, so this caps the tables near 2 GB.
MAX_TABLE_LIMIT = 50_000_000


@dataclass(frozen=True)
class ArithTables:
    """Exact values of mu, phi and d for 1 <= q <= limit.

    Arrays are indexed directly by q; index 0 is unused and holds 0.
    """

    limit: int
    mobius: np.ndarray
    totient: np.ndarray
    divisor_count: np.ndarray
    smallest_prime: np.ndarray

    def __post_init__(self):
        for arr in (self.mobius, self.totient, self.divisor_count, self.smallest_prime):
            arr.setflags(write=False)

    def factor(self, q: int) -> dict[int, int]:
        if not 1 <= q <= self.limit:
            raise InvalidArgument(f"q={q} outside table range [1, {self.limit}]")
        out: dict[int, int] = {}
        spf = self.smallest_prime
        while q > 1:
            p = int(spf[q])
            e = 0
            while q % p == 0:
                q //= p
                e += 1
            out[p] = e
        return out


def build_tables(limit: int) -> ArithTables:
    """Linear sieve for mu, phi, d and the smallest prime factor up to ``limit``."""
    if not isinstance(limit, (int, np.integer)) or limit < 1:
        raise InvalidArgument(f"limit must be a positive integer, got {limit!r}")
    limit = int(limit)
    if limit > MAX_TABLE_LIMIT:
        raise ResourceLimitError(f"limit {limit} exceeds table budget {MAX_TABLE_LIMIT}")

    n1 = limit + 1
    spf = [0] * n1
    mu = [0] * n1
    phi = [0] * n1
    d = [0] * n1
    # exponent of the smallest prime, needed to update d multiplicatively
    spf_exp = [0] * n1
    primes: list[int] = []
    mu[1] = phi[1] = d[1] = 1

    for i in range(2, n1):
        if spf[i] == 0:
            spf[i] = i
            primes.append(i)
            mu[i] = -1
            phi[i] = i - 1
            d[i] = 2
            spf_exp[i] = 1
        si = spf[i]
        mu_i, phi_i, d_i = mu[i], phi[i], d[i]
        bound = limit // i
        for p in primes:
            if p > si or p > bound:
                break
            j = i * p
            spf[j] = p
            if p == si:
                mu[j] = 0
                phi[j] = phi_i * p
                e = spf_exp[i] + 1
                spf_exp[j] = e
                d[j] = d_i // e * (e + 1)
            else:
                mu[j] = -mu_i
                phi[j] = phi_i * (p - 1)
                spf_exp[j] = 1
                d[j] = d_i * 2

    return ArithTables(
        limit=limit,
        mobius=np.array(mu, dtype=np.int8),
        totient=np.array(phi, dtype=np.int64),
        divisor_count=np.array(d, dtype=np.int64),
        smallest_prime=np.array(spf, dtype=np.int64),
    )


@lru_cache(maxsize=4)
def cached_tables(limit: int) -> ArithTables:
    return build_tables(limit)


def _distinct_primes(t: int, tables: ArithTables | None) -> list[int]:
    if tables is not None and t <= tables.limit:
        return sorted(tables.factor(t))
    primes = []
    q = t
    p = 2
    while p * p <= q:
        if q % p == 0:
            primes.append(p)
            while q % p == 0:
                q //= p
        p += 1 if p == 2 else 2
    if q > 1:
        primes.append(q)
    return primes


def squarefree_divisors(t: int, tables: ArithTables | None = None) -> list[tuple[int, int]]:
    """All (e, mu(e)) with e | t and mu(e) != 0."""
    divs = [(1, 1)]
    for p in _distinct_primes(t, tables):
        divs += [(e * p, -s) for e, s in divs]
    return divs


def coprime_count(t: int, Q: int, tables: ArithTables | None = None) -> tuple[int, float]:
    """Return ``(gamma, epsilon)`` with gamma = #{q <= Q : gcd(t, q) = 1}.

    gamma comes from the Moebius identity sum_{e | t} mu(e) floor(Q / e);
    epsilon = gamma - phi(t) Q / t and always satisfies |epsilon| <= d(t).
    """
    if t < 1:
        raise InvalidArgument(f"t must be >= 1, got {t}")
    if Q < 0:
        raise InvalidArgument(f"Q must be >= 0, got {Q}")
    divs = squarefree_divisors(t, tables)
    gamma = sum(s * (Q // e) for e, s in divs)
    # phi(t)/t = sum mu(e)/e over the same divisors
    phi_t = sum(s * (t // e) for e, s in divs)
    epsilon = gamma - phi_t * Q / t
    return gamma, float(epsilon)


def coprime_errors(t: int, Q_max: int, tables: ArithTables | None = None) -> np.ndarray:
    """epsilon_t(Q) of ``coprime_count`` for every Q = 0..Q_max at once."""
    if t < 1 or Q_max < 0:
        raise InvalidArgument(f"need t >= 1 and Q_max >= 0, got t={t}, Q_max={Q_max}")
    divs = squarefree_divisors(t, tables)
    Q = np.arange(Q_max + 1, dtype=np.int64)
    gamma = np.zeros(Q_max + 1, dtype=np.int64)
    for e, s in divs:
        gamma += s * (Q // e)
    phi_t = sum(s * (t // e) for e, s in divs)
    return gamma - phi_t * Q / t


def coprime_in_range(t: int, lo: int, hi: int, tables: ArithTables | None = None) -> int:
    """#{q : lo < q <= hi, gcd(t, q) = 1}; zero for an empty range."""
    if hi <= lo:
        return 0
    divs = squarefree_divisors(t, tables)
    lo = max(lo, 0)
    return sum(s * (hi // e - lo // e) for e, s in divs)


def totient_power_sum(z: float, Q: int, tables: ArithTables) -> tuple[int | float, float]:
    """sum_{q <= Q} q^(z-1) phi(q) and its main term Q^(z+1) / ((z+1) zeta(2)).

    Integer ``z`` gives an exact integer sum. Other ``z`` are summed with
    ``math.fsum`` (correctly rounded, order independent).
    """
    if not z > 0:
        raise InvalidArgument(f"z must be > 0, got {z}")
    if Q < 1 or Q > tables.limit:
        raise InvalidArgument(f"Q={Q} outside [1, {tables.limit}]")
    phi = tables.totient[1 : Q + 1]
    main = Q ** (z + 1) / ((z + 1) * ZETA2)
    if float(z).is_integer():
        k = int(z) - 1
        if (Q + 1) ** (k + 2) < 2 ** 62:
            q = np.arange(1, Q + 1, dtype=np.int64)
            total = int(np.sum(q ** k * phi))
        else:
            total = sum(q ** k * int(f) for q, f in zip(range(1, Q + 1), phi.tolist()))
        return total, main
    q = np.arange(1, Q + 1, dtype=np.float64)
    return math.fsum((q ** (z - 1)) * phi), main


def divisor_summatory(Q: int) -> tuple[int, float]:
    """Exact sum_{q <= Q} d(q) by the hyperbola method, with main term Q ln Q."""
    if Q < 1:
        raise InvalidArgument(f"Q must be >= 1, got {Q}")
    s = math.isqrt(Q)
    total = 2 * sum(Q // i for i in range(1, s + 1)) - s * s
    return total, Q * math.log(Q)


def mobius_weighted_sums(Q: int, tables: ArithTables) -> tuple[float, float]:
    """(sum mu(e)/e, sum mu(e)/e^2) over e <= Q."""
    if Q < 1 or Q > tables.limit:
        raise InvalidArgument(f"Q={Q} outside [1, {tables.limit}]")
    mu = tables.mobius[1 : Q + 1].astype(np.float64)
    e = np.arange(1, Q + 1, dtype=np.float64)
    return math.fsum(mu / e), math.fsum(mu / (e * e))


def falling_factorial_ratios(gamma: float, t_max: int) -> np.ndarray:
    """|(gamma)_t / t!| for t = 1..t_max, where (gamma)_t is the falling factorial."""
    s = np.arange(1, t_max + 1, dtype=np.float64)
    return np.abs(np.cumprod((gamma + 1 - s) / s))


def pochhammer_bound_check(gamma: float, t_max: int) -> float:
    """max_t |(gamma)_t / t!| (t+1)^(1+gamma) / e^((gamma+1)^2); at most 1 when the bound holds."""
    if not 0 < gamma < 1:
        raise InvalidArgument(f"gamma must lie in (0, 1), got {gamma}")
    if t_max < 1:
        raise InvalidArgument(f"t_max must be >= 1, got {t_max}")
    vals = falling_factorial_ratios(gamma, t_max)
    t = np.arange(1, t_max + 1, dtype=np.float64)
    scaled = vals * (t + 1) ** (1 + gamma) / math.exp((gamma + 1) ** 2)
    return float(scaled.max())
