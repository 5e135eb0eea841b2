"""Exact enumeration of lattice pairs, dyadic class counts and solution search."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from ._parallel import ordered_map
from .arith import coprime_in_range
from .errors import InvalidArgument, ResourceLimitError
from .forms import (ApproxFunction, Exponents, check_height_bound,
                    dyadic_checkpoints, iroot, iroot_array)

MAX_PAIRS = 50_000_000
# fixed so that results never depend on the worker count
CHUNK_PAIRS = 1 << 16


@dataclass(frozen=True)
class FormPair:
    a: int
    b: int
    h: int
    restricted: bool


@dataclass(frozen=True)
class SolutionRecord:
    a: int
    b: int
    c: int
    h: int
    residual: float
    bound: float


@dataclass(frozen=True)
class DyadicCounts:
    t: int
    alpha: int
    beta: int


def is_restricted(a: int, b: int, e: Exponents) -> bool:
    """gcd(a, b) = 1 and 1/2 < a^n / b^m < 2, decided in integers."""
    an, bm = a ** e.n, b ** e.m
    return math.gcd(a, b) == 1 and 2 * an > bm and an < 2 * bm


def pair_arrays(e: Exponents, H: int, restricted_only: bool = False):
    """Arrays (a, b, h) of every pair with h <= H, sorted by (h, a)."""
    H = check_height_bound(H)
    A, B = iroot(H, e.n), iroot(H, e.m)
    if A * B > MAX_PAIRS:
        raise ResourceLimitError(f"{A * B} candidate pairs exceed the enumeration budget {MAX_PAIRS}")
    a = np.repeat(np.arange(1, A + 1, dtype=np.int64), B)
    b = np.tile(np.arange(1, B + 1, dtype=np.int64), A)
    an, bm = a ** e.n, b ** e.m
    h = np.maximum(an, bm)
    keep = h <= H
    if restricted_only:
        keep &= (np.gcd(a, b) == 1) & (2 * an > bm) & (an < 2 * bm)
    a, b, h = a[keep], b[keep], h[keep]
    order = np.lexsort((a, h))
    return a[order], b[order], h[order]


def pairs_by_height(e: Exponents, H: int, restricted_only: bool = False) -> Iterator[FormPair]:
    """Every pair with h_{a,b} <= H exactly once, ascending in (h, a)."""
    a, b, h = pair_arrays(e, H, restricted_only)
    for ai, bi, hi in zip(a.tolist(), b.tolist(), h.tolist()):
        yield FormPair(ai, bi, hi, restricted_only or is_restricted(ai, bi, e))


def dyadic_counts(e: Exponents, t: int) -> DyadicCounts:
    """|A_t| and |B_t| for the restricted set.

    A_t holds (a, b) with a^n > b^m and 2^t <= a < 2^(t+1); B_t is the mirror
    image. Pairs with a^n = b^m belong to neither. Each a (resp. b) contributes
    the number of coprime partners in an exact integer window, counted with
    the Moebius identity.
    """
    if t < 0:
        raise InvalidArgument(f"t must be >= 0, got {t}")
    n, m = e.n, e.m
    alpha = 0
    for a in range(1 << t, 1 << (t + 1)):
        an = a ** n
        # an/2 < b^m < an
        alpha += coprime_in_range(a, iroot(an // 2, m), iroot(an - 1, m))
    beta = 0
    for b in range(1 << t, 1 << (t + 1)):
        bm = b ** m
        beta += coprime_in_range(b, iroot(bm // 2, n), iroot(bm - 1, n))
    return DyadicCounts(t, alpha, beta)


def sample_restricted_pairs(e: Exponents, h_lo: int, h_hi: int, count: int,
                            rng: np.random.Generator, max_tries: int = 10_000) -> list[FormPair]:
    """Random restricted pairs with h in [h_lo, h_hi], log-uniform in h.

    a is drawn from a log-uniform target height, then b uniformly from the
    cone window b^m in (a^n / 2, 2 a^n); draws failing coprimality or the
    height range are rejected.
    """
    if not 1 <= h_lo <= h_hi:
        raise InvalidArgument(f"need 1 <= h_lo <= h_hi, got {h_lo}, {h_hi}")
    check_height_bound(h_hi)
    out: list[FormPair] = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > max_tries * max(count, 1):
            raise InvalidArgument(f"no restricted pairs found with h in [{h_lo}, {h_hi}]")
        target = math.exp(rng.uniform(math.log(h_lo), math.log(h_hi)))
        a = max(1, int(round(target ** (1.0 / e.n))))
        an = a ** e.n
        b_lo = iroot(an // 2, e.m) + 1
        b_hi = iroot(2 * an - 1, e.m)
        if b_hi < b_lo:
            continue
        b = int(rng.integers(b_lo, b_hi + 1))
        h = max(an, b ** e.m)
        if h_lo <= h <= h_hi and is_restricted(a, b, e):
            out.append(FormPair(a, b, h, True))
    return out


# ---------------------------------------------------------------------------
# nearest p-th powers

def nearest_power_residual(target: float, p: int) -> tuple[int, float]:
    """argmin_{c >= 0} |target - c^p| and the attained minimum (ties to smaller c)."""
    if not target >= 0 or math.isinf(target):
        raise InvalidArgument(f"target must be finite and >= 0, got {target}")
    if p < 1:
        raise InvalidArgument(f"p must be >= 1, got {p}")
    c0 = int(math.floor(target ** (1.0 / p)))
    best_c, best_r = -1, math.inf
    for c in (c0 - 1, c0, c0 + 1, c0 + 2):
        if c < 0:
            continue
        r = abs(target - c ** p)
        if r < best_r:
            best_c, best_r = c, r
    return best_c, float(best_r)


def nearest_power_residual_array(target: np.ndarray, p: int, exclude_zero: bool = False):
    """Vectorised ``nearest_power_residual``; c is restricted to c >= 1 when
    ``exclude_zero`` is set."""
    target = np.asarray(target, dtype=np.float64)
    if p == 1:
        c0 = np.floor(target)
    else:
        c0 = np.floor(np.power(target, 1.0 / p))
    c0 = c0.astype(np.int64)
    floor_c = 1 if exclude_zero else 0
    best_c = np.full(target.shape, -1, dtype=np.int64)
    best_r = np.full(target.shape, np.inf)
    for off in (-1, 0, 1, 2):
        c = c0 + off
        valid = c >= floor_c
        cc = np.where(valid, c, floor_c)
        r = np.abs(target - (cc ** p).astype(np.float64))
        better = valid & (r < best_r)
        best_c = np.where(better, cc, best_c)
        best_r = np.where(better, r, best_r)
    return best_c, best_r


# ---------------------------------------------------------------------------
# solutions

def _check_point(x: float, y: float):
    if not (0 <= x < 1 and 0 <= y < 1):
        raise InvalidArgument(f"(x, y) = ({x}, {y}) must lie in [0, 1)^2")


def _solve_chunk(args):
    an, bm, h, x, y, p, bound, exclude_zero = args
    target = an.astype(np.float64) * x + bm.astype(np.float64) * y
    c, r = nearest_power_residual_array(target, p, exclude_zero)
    return c, r, r < bound


def _solve(x, y, e, psi, H, restricted_only, exclude_zero, threads):
    _check_point(x, y)
    a, b, h = pair_arrays(e, H, restricted_only)
    bound = np.asarray(psi(h.astype(np.float64)), dtype=np.float64)
    an, bm = a ** e.n, b ** e.m
    chunks = [(an[i:i + CHUNK_PAIRS], bm[i:i + CHUNK_PAIRS], h[i:i + CHUNK_PAIRS], x, y, e.p,
               bound[i:i + CHUNK_PAIRS], exclude_zero)
              for i in range(0, len(a), CHUNK_PAIRS)]
    parts = ordered_map(_solve_chunk, chunks, threads)
    if parts:
        c = np.concatenate([q[0] for q in parts])
        r = np.concatenate([q[1] for q in parts])
        hit = np.concatenate([q[2] for q in parts])
    else:
        c = r = hit = np.zeros(0)
    return a, b, h, c, r, bound, hit.astype(bool)


def find_solutions(x: float, y: float, e: Exponents, psi: ApproxFunction, H: int,
                   restricted_only: bool = False, exclude_zero: bool = False,
                   threads: int = 1) -> list[SolutionRecord]:
    """All pairs with h <= H admitting c with |a^n x + b^m y - c^p| < psi(h).

    Each hit is reported once, with the best c. ``exclude_zero`` drops c = 0
    from the candidates.
    """
    a, b, h, c, r, bound, hit = _solve(x, y, e, psi, H, restricted_only, exclude_zero, threads)
    idx = np.flatnonzero(hit)
    return [SolutionRecord(int(a[i]), int(b[i]), int(c[i]), int(h[i]), float(r[i]), float(bound[i]))
            for i in idx]


def hit_profile(x: float, y: float, e: Exponents, psi: ApproxFunction,
                checkpoints: list[int] | int, restricted_only: bool = False,
                exclude_zero: bool = False, threads: int = 1) -> list[tuple[int, int]]:
    """Cumulative number of pairs with a solution, sampled at the checkpoints."""
    if isinstance(checkpoints, (int, np.integer)):
        checkpoints = dyadic_checkpoints(int(checkpoints))
    cps = sorted(int(c) for c in checkpoints)
    _, _, h, _, _, _, hit = _solve(x, y, e, psi, cps[-1], restricted_only, exclude_zero, threads)
    hit_heights = h[hit]
    counts = np.searchsorted(hit_heights, np.asarray(cps, dtype=np.int64), side="right")
    return [(hc, int(k)) for hc, k in zip(cps, counts)]


def restricted_ratio_series(e: Exponents, psi: ApproxFunction, H: int) -> list[tuple[int, float]]:
    """Restricted over full Lebesgue partial sums along dyadic checkpoints."""
    from .forms import lebesgue_sum_partial

    full = lebesgue_sum_partial(e, psi, H)
    rest = lebesgue_sum_partial(e, psi, H, restricted=True)
    return [(hc, (r / f) if f > 0 else 0.0)
            for hc, f, r in zip(full.heights, full.partial_sums, rest.partial_sums)]


__all__ = [
    "FormPair", "SolutionRecord", "DyadicCounts", "is_restricted", "pair_arrays",
    "pairs_by_height", "dyadic_counts", "sample_restricted_pairs", "nearest_power_residual",
    "nearest_power_residual_array", "find_solutions", "hit_profile",
    "restricted_ratio_series", "iroot_array",
]
