"""Exponent triples, approximating functions, regime classification and the
two volume sums (Lebesgue and Hausdorff) with their dimension formulas.

Sums over pairs (a, b) are evaluated by grouping pairs of equal height:
every term depends on (a, b) only through h = max(a^n, b^m), so the sum over
h <= H is an exact weighted sum over the O(H^(1/n) + H^(1/m)) distinct
heights. Naive double loops are kept in the test-suite as oracles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import (HeightRangeError, HypothesisError, InvalidArgument,
                     TruncatedDomainError)

# vectorised paths keep heights in int64 with headroom for one multiplication check
MAX_HEIGHT = 2 ** 62


@dataclass(frozen=True)
class Exponents:
    n: int
    m: int
    p: int

    def __post_init__(self):
        for name in ("n", "m", "p"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise InvalidArgument(f"{name} must be a positive integer, got {v!r}")

    @property
    def k(self) -> int:
        return math.gcd(self.n, self.m)

    @property
    def N(self) -> int:
        return max(self.n, self.m)

    @property
    def M(self) -> int:
        return min(self.n, self.m)

    @property
    def exponent_sum(self) -> Fraction:
        """1/n + 1/m + 1/p."""
        return Fraction(1, self.n) + Fraction(1, self.m) + Fraction(1, self.p)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.n, self.m, self.p)


def height(pair: tuple[int, int], e: Exponents) -> int:
    a, b = pair
    if a < 1 or b < 1:
        raise InvalidArgument(f"pair entries must be positive, got {pair}")
    h = max(int(a) ** e.n, int(b) ** e.m)
    if h > MAX_HEIGHT:
        raise HeightRangeError(f"height of {pair} exceeds 2^62")
    return h


# ---------------------------------------------------------------------------
# approximating functions

class ApproxFunction:
    """Positive, non-increasing psi on the positive integers.

    Calling accepts a scalar or an array of heights and returns floats.
    """

    def __call__(self, h):
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class PowerLaw(ApproxFunction):
    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise InvalidArgument(f"tau must be > 0, got {self.tau}")

    def __call__(self, h):
        return np.power(np.asarray(h, dtype=np.float64), -self.tau)[()]

    def describe(self):
        return {"family": "power", "tau": self.tau}


@dataclass(frozen=True)
class PowerLawCapped(ApproxFunction):
    """min(h^-tau, h^-cap_exponent): the thinned function used when the
    small-angle estimate needs psi(q) <= q^-(1/p + 1/N)."""

    tau: float
    cap_exponent: float

    def __post_init__(self):
        if not self.tau > 0 or not self.cap_exponent > 0:
            raise InvalidArgument("tau and cap_exponent must be > 0")

    @classmethod
    def for_exponents(cls, tau: float, e: Exponents) -> "PowerLawCapped":
        return cls(tau, 1 / e.p + 1 / e.N)

    def __call__(self, h):
        return np.power(np.asarray(h, dtype=np.float64), -max(self.tau, self.cap_exponent))[()]

    def describe(self):
        return {"family": "power-capped", "tau": self.tau, "cap_exponent": self.cap_exponent}


class Tabulated(ApproxFunction):
    """Step function through (height, value) knots.

    psi(h) is the value at the largest knot <= h. The first knot must be 1;
    heights beyond the last knot raise TruncatedDomainError.
    """

    def __init__(self, heights, values):
        hs = np.asarray(heights, dtype=np.float64)
        vs = np.asarray(values, dtype=np.float64)
        if hs.ndim != 1 or hs.shape != vs.shape or hs.size == 0:
            raise InvalidArgument("heights and values must be equal-length 1-d sequences")
        if hs[0] != 1:
            raise InvalidArgument("table must start at height 1")
        if np.any(np.diff(hs) <= 0):
            raise InvalidArgument("heights must be strictly increasing")
        if np.any(vs <= 0) or not np.all(np.isfinite(vs)):
            raise InvalidArgument("psi values must be finite and strictly positive")
        if np.any(np.diff(vs) > 0):
            raise InvalidArgument("psi values must be non-increasing")
        self.heights = hs
        self.values = vs
        self.max_height = float(hs[-1])

    @classmethod
    def from_function(cls, fn, heights) -> "Tabulated":
        hs = np.asarray(heights, dtype=np.float64)
        return cls(hs, [fn(float(h)) for h in hs])

    def __call__(self, h):
        h = np.asarray(h, dtype=np.float64)
        if np.any(h > self.max_height):
            raise TruncatedDomainError(f"psi table ends at {self.max_height:g}")
        if np.any(h < 1):
            raise InvalidArgument("psi is defined for heights >= 1")
        idx = np.searchsorted(self.heights, h, side="right") - 1
        return self.values[idx][()]

    def describe(self):
        return {"family": "table", "knots": int(self.heights.size), "max_height": self.max_height}


@dataclass(frozen=True)
class Scaled(ApproxFunction):
    psi: ApproxFunction
    factor: float

    def __call__(self, h):
        return self.factor * np.asarray(self.psi(h))

    def describe(self):
        return {"family": "scaled", "factor": self.factor, "base": self.psi.describe()}


@dataclass(frozen=True)
class DimensionFunction:
    """f(r) = r^s, with companion g(r) = f(r)/r = r^(s-1)."""

    s: float

    def __post_init__(self):
        if not 0 < self.s <= 2:
            raise InvalidArgument(f"s must lie in (0, 2], got {self.s}")

    def f(self, r):
        return np.power(r, self.s)

    def g(self, r):
        return np.power(r, self.s - 1)


# ---------------------------------------------------------------------------
# regime classification

@dataclass
class RegimeReport:
    exponents: tuple[int, int, int]
    theorem_applicable: bool
    always_null: bool
    dimension_applicable: bool
    classification: str | None = None
    threshold_tau: float | None = None
    dimension: float | None = None
    dimension_in_hypothesis: bool | None = None
    notes: list[str] = field(default_factory=list)


def _always_null(e: Exponents) -> bool:
    n, m, p = e.n, e.m, e.p
    if n == m == 1:
        return p > 1
    if n == m == 2:
        return False
    denom = n * m - n - m
    return denom > 0 and p * denom > n * m


def regime_classify(e: Exponents, tau: float | None = None) -> RegimeReport:
    """Which measure theorem applies to ``e``, whether W is null for every psi,
    and, given a power-law exponent, the convergence class and dimension."""
    applicable = (e.n == e.m == 1) or e.k >= 2
    dim_ok = (e.n == e.m == e.p == 1) or e.k >= 2
    report = RegimeReport(
        exponents=e.as_tuple(),
        theorem_applicable=applicable,
        always_null=applicable and _always_null(e),
        dimension_applicable=dim_ok,
    )
    if not applicable:
        report.notes.append("gcd(n, m) = 1 and not n = m = 1: measure criterion not established")
    if tau is not None:
        cls, thr = convergence_classify_power_law(e, tau)
        report.classification = cls
        report.threshold_tau = thr
        if dim_ok:
            report.dimension = dimension_formula(e, tau)
            report.dimension_in_hypothesis = tau > 1
            if tau <= 1:
                report.notes.append("dimension formula evaluated outside tau > 1")
    return report


def convergence_classify_power_law(e: Exponents, tau: float) -> tuple[str, float]:
    """Divergent iff tau <= 1/n + 1/m + 1/p - 1 (the boundary is a harmonic series)."""
    if not tau > 0:
        raise InvalidArgument(f"tau must be > 0, got {tau}")
    thr = e.exponent_sum - 1
    cls = "divergent" if Fraction(tau) <= thr else "convergent"
    return cls, float(thr)


class LowerOrder(NamedTuple):
    value: float
    estimate: bool


def lower_order(psi: ApproxFunction, r_max: int = 32) -> LowerOrder:
    """liminf of -log2 psi(2^r) / r.

    Exact for the power-law families; for tables, the minimum over the last
    ceil(r_max / 4) exponents up to r_max, flagged as an estimate.
    """
    if r_max < 8:
        raise InvalidArgument(f"r_max must be >= 8, got {r_max}")
    if isinstance(psi, PowerLaw):
        return LowerOrder(float(psi.tau), False)
    if isinstance(psi, PowerLawCapped):
        return LowerOrder(float(max(psi.tau, psi.cap_exponent)), False)
    if isinstance(psi, Tabulated) and psi.max_height < 2.0 ** r_max:
        raise TruncatedDomainError(f"table ends at {psi.max_height:g} < 2^{r_max}")
    window = math.ceil(r_max / 4)
    r = np.arange(r_max - window + 1, r_max + 1, dtype=np.float64)
    q = -np.log2(np.asarray(psi(2.0 ** r), dtype=np.float64)) / r
    return LowerOrder(float(q.min()), True)


def dimension_formula(e: Exponents, lam: float) -> float:
    """1 + min(1, (1/n + 1/m + 1/p) / (lambda + 1))."""
    if lam < 0 or math.isnan(lam):
        raise InvalidArgument(f"lambda must be >= 0, got {lam}")
    if math.isinf(lam):
        raise HypothesisError("dimension formula is stated only for finite lower order")
    return 1.0 + min(1.0, float(e.exponent_sum) / (lam + 1.0))


def delta_window(e: Exponents) -> float:
    """Upper end of the admissible divisor-bound exponent:
    k (1 + 1/p + 1/N + k/(2pN) - 1/M) - 2."""
    report = regime_classify(e)
    if not report.theorem_applicable or report.always_null:
        raise HypothesisError(f"{e.as_tuple()} is outside the regime where the window is positive")
    k, N, M, p = e.k, e.N, e.M, e.p
    val = k * (1 + Fraction(1, p) + Fraction(1, N) + Fraction(k, 2 * p * N) - Fraction(1, M)) - 2
    return float(val)


# ---------------------------------------------------------------------------
# exact integer roots and the height index

def iroot(x: int, k: int) -> int:
    """floor(x^(1/k)) for integer x >= 0."""
    if x < 0:
        raise InvalidArgument("iroot of a negative number")
    if x < 2 or k == 1:
        return x
    r = int(round(x ** (1.0 / k))) if x < 2 ** 1000 else 1 << (x.bit_length() // k)
    while r ** k > x:
        r -= 1
    while (r + 1) ** k <= x:
        r += 1
    return r


def iroot_array(x: np.ndarray, k: int) -> np.ndarray:
    """Vectorised floor(x^(1/k)) for int64 x in [0, 2^62]."""
    x = np.asarray(x, dtype=np.int64)
    if k == 1:
        return x.copy()
    rf = np.power(x.astype(np.float64), 1.0 / k)
    near = np.rint(rf)
    r = np.floor(rf).astype(np.int64)
    # float roots carry ~1e-15 relative error: only near-integers need an exact check
    amb = np.abs(rf - near) <= 1e-6 * np.maximum(near, 1.0)
    if np.any(amb):
        c = near[amb].astype(np.int64)
        r[amb] = np.where(c ** k <= x[amb], c, c - 1)
    return r


def check_height_bound(H: int) -> int:
    H = int(H)
    if H < 1:
        raise InvalidArgument(f"H must be >= 1, got {H}")
    if H > MAX_HEIGHT:
        raise HeightRangeError(f"H={H} exceeds the vectorised height range 2^62")
    return H


@lru_cache(maxsize=16)
def height_index(n: int, m: int, H: int) -> tuple[np.ndarray, np.ndarray]:
    """Distinct heights h <= H and the number of pairs (a, b) with h_{a,b} = h.

    Heights attained on the a-side (b^m <= a^n) and strictly on the b-side
    (a^n < b^m) are listed separately, then merged in ascending order.
    """
    H = check_height_bound(H)
    A = iroot(H, n)
    B = iroot(H, m)
    a = np.arange(1, A + 1, dtype=np.int64)
    b = np.arange(1, B + 1, dtype=np.int64)
    ha = a ** n
    hb = b ** m
    ca = iroot_array(ha, m)
    cb = iroot_array(hb - 1, n)
    h = np.concatenate([ha, hb])
    c = np.concatenate([ca, cb])
    keep = c > 0
    h, c = h[keep], c[keep]
    order = np.argsort(h, kind="stable")
    h, c = h[order], c[order]
    h.setflags(write=False)
    c.setflags(write=False)
    return h, c


@lru_cache(maxsize=16)
def restricted_height_index(n: int, m: int, H: int) -> tuple[np.ndarray, np.ndarray]:
    """As ``height_index`` but counting only pairs with gcd(a, b) = 1 and
    a^n / 2 < b^m < 2 a^n. Counts use the Moebius identity per a (resp. b)."""
    from .arith import coprime_in_range

    H = check_height_bound(H)
    hs, cs = [], []
    for a in range(1, iroot(H, n) + 1):
        an = a ** n
        # b with an/2 < b^m <= an
        lo = iroot(an // 2, m)
        hi = iroot(an, m)
        cnt = coprime_in_range(a, lo, hi)
        if cnt:
            hs.append(an)
            cs.append(cnt)
    for b in range(1, iroot(H, m) + 1):
        bm = b ** m
        # a with bm/2 < a^n < bm
        lo = iroot(bm // 2, n)
        hi = iroot(bm - 1, n)
        cnt = coprime_in_range(b, lo, hi)
        if cnt:
            hs.append(bm)
            cs.append(cnt)
    h = np.array(hs, dtype=np.int64)
    c = np.array(cs, dtype=np.int64)
    order = np.argsort(h, kind="stable")
    h, c = h[order], c[order]
    h.setflags(write=False)
    c.setflags(write=False)
    return h, c


# ---------------------------------------------------------------------------
# partial sums

def dyadic_checkpoints(H: int) -> list[int]:
    pts = [1 << i for i in range(int(H).bit_length()) if (1 << i) <= H]
    if pts[-1] != H:
        pts.append(int(H))
    return pts


@dataclass
class SumSeries:
    heights: list[int]
    partial_sums: list[float]
    kind: str
    s: float | None = None
    restricted: bool = False

    @property
    def total(self) -> float:
        return self.partial_sums[-1]

    def block_increments(self) -> np.ndarray:
        ps = np.asarray(self.partial_sums, dtype=np.float64)
        return np.diff(ps, prepend=0.0)

    def last_block_increment(self) -> float:
        return float(self.block_increments()[-1])

    def saturates(self, rel_tol: float = 1e-3) -> bool:
        """Last dyadic block adds less than ``rel_tol`` of the running total."""
        return self.last_block_increment() < rel_tol * self.total

    def tail_slope(self, fraction: float = 0.5, min_blocks: int = 4) -> float:
        """Least-squares slope of log2(block increment) per height doubling,
        over the trailing ``fraction`` of non-empty dyadic blocks."""
        inc = self.block_increments()[1:]
        hs = np.asarray(self.heights[1:], dtype=np.float64)
        full = hs == 2.0 ** np.round(np.log2(hs))
        inc, hs = inc[full], hs[full]
        ok = inc > 0
        inc, hs = inc[ok], hs[ok]
        k = max(min_blocks, int(len(inc) * fraction))
        if len(inc) < min_blocks:
            raise InvalidArgument("too few non-empty dyadic blocks to fit a tail slope")
        x = np.log2(hs[-k:])
        y = np.log2(inc[-k:])
        return float(np.polyfit(x, y, 1)[0])

    def as_rows(self) -> list[tuple[int, float]]:
        return list(zip(self.heights, self.partial_sums))


def _accumulate(h: np.ndarray, terms: np.ndarray, checkpoints: list[int]) -> list[float]:
    idx = np.searchsorted(h, np.asarray(checkpoints, dtype=np.int64), side="right")
    blocks = []
    prev = 0
    for i in idx:
        blocks.append(math.fsum(terms[prev:i]))
        prev = i
    return [math.fsum(blocks[: j + 1]) for j in range(len(blocks))]


def _index(e: Exponents, H: int, restricted: bool):
    if restricted:
        return restricted_height_index(e.n, e.m, int(H))
    return height_index(e.n, e.m, int(H))


def lebesgue_terms(e: Exponents, psi: ApproxFunction, h: np.ndarray) -> np.ndarray:
    hf = h.astype(np.float64)
    return np.asarray(psi(hf), dtype=np.float64) / np.power(hf, 1.0 - 1.0 / e.p)


def hausdorff_terms(e: Exponents, psi: ApproxFunction, s: float, h: np.ndarray) -> np.ndarray:
    if s == 2:
        return lebesgue_terms(e, psi, h)
    hf = h.astype(np.float64)
    return np.power(np.asarray(psi(hf), dtype=np.float64) / hf, s - 1.0) * np.power(hf, 1.0 / e.p)


def lebesgue_sum_partial(e: Exponents, psi: ApproxFunction, H: int,
                         restricted: bool = False,
                         checkpoints: list[int] | None = None) -> SumSeries:
    """Partial sums of sum psi(h)/h^(1-1/p) over pairs with h <= checkpoint."""
    H = check_height_bound(H)
    h, cnt = _index(e, H, restricted)
    terms = cnt * lebesgue_terms(e, psi, h)
    cps = checkpoints or dyadic_checkpoints(H)
    return SumSeries(list(cps), _accumulate(h, terms, cps), "lebesgue", restricted=restricted)


def hausdorff_sum_partial(e: Exponents, psi: ApproxFunction, dim_fn: DimensionFunction | float,
                          H: int, restricted: bool = False,
                          checkpoints: list[int] | None = None) -> SumSeries:
    """Partial sums of sum g(psi(h)/h) h^(1/p) for g(r) = r^(s-1), s in (1, 2]."""
    s = dim_fn.s if isinstance(dim_fn, DimensionFunction) else float(dim_fn)
    if not 1 < s <= 2:
        raise InvalidArgument(f"s must lie in (1, 2], got {s}")
    H = check_height_bound(H)
    h, cnt = _index(e, H, restricted)
    terms = cnt * hausdorff_terms(e, psi, s, h)
    cps = checkpoints or dyadic_checkpoints(H)
    return SumSeries(list(cps), _accumulate(h, terms, cps), "hausdorff", s=s, restricted=restricted)
