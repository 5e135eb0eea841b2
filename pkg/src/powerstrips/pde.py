"""Resonance scan for periodic wave-type operators d^p/dt^p - d^n/dx1^n - d^m/dx2^m.

A Fourier mode (a, b, c) of the periodic problem is resonant when
a^n u + b^m v = c^p, with u = gamma^p / alpha^n and v = gamma^p / beta^m
(the classical case n = m = p = 2 gives u = gamma^2/alpha^2, v = gamma^2/beta^2).
Near-resonances |a^n u + b^m v - c^p| < max(|a|, |b|)^-tau are the small
denominators that can destroy smoothness of solutions.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from ._parallel import ordered_map
from .errors import HeightRangeError, InvalidArgument
from .enumeration import nearest_power_residual_array
from .forms import MAX_HEIGHT, Exponents, convergence_classify_power_law

EPS = np.finfo(np.float64).eps


def _positive(name, v):
    if isinstance(v, bool) or not isinstance(v, (int, float, Rational)):
        raise InvalidArgument(f"{name} must be a real number, got {v!r}")
    if not (v > 0 and math.isfinite(float(v))):
        raise InvalidArgument(f"{name} must be finite and > 0, got {v!r}")
    return Fraction(v) if isinstance(v, Rational) else float(v)


@dataclass(frozen=True)
class WaveOperatorSpec:
    """Exponents and the two frequency ratios u, v of the resonance condition.

    Rational inputs (int or Fraction) are kept exact, so resonances are
    detected in exact arithmetic.
    """

    exponents: Exponents
    u: float | Fraction
    v: float | Fraction
    periods: tuple | None = None

    @classmethod
    def from_periods(cls, alpha, beta, gamma, exponents: Exponents | None = None) -> "WaveOperatorSpec":
        e = exponents or Exponents(2, 2, 2)
        al, be, ga = (_positive(k, x) for k, x in (("alpha", alpha), ("beta", beta), ("gamma", gamma)))
        u = ga ** e.p / al ** e.n
        v = ga ** e.p / be ** e.m
        return cls(e, u, v, (al, be, ga))

    @classmethod
    def from_ratios(cls, u, v, exponents: Exponents | None = None) -> "WaveOperatorSpec":
        return cls(exponents or Exponents(2, 2, 2), _positive("u", u), _positive("v", v))

    @property
    def is_rational(self) -> bool:
        return isinstance(self.u, Fraction) and isinstance(self.v, Fraction)

    def describe(self) -> dict:
        out = {"exponents": list(self.exponents.as_tuple()), "u": _num(self.u), "v": _num(self.v),
               "rational": self.is_rational}
        if self.periods is not None:
            out["periods"] = [_num(p) for p in self.periods]
        return out


def _num(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else str(x.numerator)
    return float(x)


def resonance_residual(spec: WaveOperatorSpec, a: int, b: int, c: int):
    """|a^n u + b^m v - c^p|: exact (Fraction) for rational specs, float otherwise."""
    if a == 0 and b == 0:
        raise InvalidArgument("(a, b) must not be (0, 0)")
    e = spec.exponents
    val = a ** e.n * spec.u + b ** e.m * spec.v - c ** e.p
    return abs(val) if spec.is_rational else abs(float(val))


@dataclass
class ObstructionReport:
    H: int
    best: dict
    hits: list[dict]
    exact_resonance: bool
    error_bar: float
    scanned_pairs: int
    spec: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"H": self.H, "best": self.best, "hits": self.hits,
                "exact_resonance": self.exact_resonance, "error_bar": self.error_bar,
                "scanned_pairs": self.scanned_pairs, "spec": self.spec, "notes": self.notes}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _axis(H: int, k: int) -> np.ndarray:
    pos = np.arange(1, H + 1, dtype=np.int64)
    # even powers are blind to the sign, odd ones are not
    return pos if k % 2 == 0 else np.concatenate([-pos[::-1], pos])


def _exact_residual(spec, a, b, c):
    e = spec.exponents
    return abs(a ** e.n * spec.u + b ** e.m * spec.v - c ** e.p)


def _scan_rows(args):
    spec, a_rows, b_axis, taus, c_max = args
    e = spec.exponents
    u, v = float(spec.u), float(spec.v)
    A = a_rows.astype(np.float64)[:, None] ** e.n
    B = b_axis.astype(np.float64)[None, :] ** e.m
    t = A * u + B * v
    # nearest c^p (negative c allowed for odd p), then clipped to |c| <= c_max;
    # |t - c^p| is unimodal in |c|, so the clipped c is the best admissible one
    mag = np.abs(t)
    cm, _ = nearest_power_residual_array(mag, e.p)
    cm = np.minimum(cm, c_max).astype(np.float64)
    if e.p % 2:
        best_c = np.where(t < 0, -cm, cm)
    else:
        best_c = np.where(t < 0, 0.0, cm)
    best_r = np.abs(t - best_c ** e.p)
    err = 8 * EPS * (np.abs(A * u) + np.abs(B * v) + np.abs(best_c) ** e.p + 1)
    ha = np.maximum(np.abs(a_rows)[:, None], np.abs(b_axis)[None, :]).astype(np.float64)
    counts = []
    for tau in taus:
        bound = ha ** -tau
        hit = best_r < bound
        if spec.is_rational:
            amb = np.argwhere(np.abs(best_r - bound) <= err)
            for i, j in amb:
                ai, bj, ci = int(a_rows[i]), int(b_axis[j]), int(best_c[i, j])
                exact = _exact_residual(spec, ai, bj, ci)
                if float(tau).is_integer():
                    hit[i, j] = exact * Fraction(max(abs(ai), abs(bj))) ** int(tau) < 1
                else:
                    hit[i, j] = float(exact) < bound[i, j]
        counts.append(int(hit.sum()))
    # candidates for the minimum: everything within the error bar of the float minimum
    rmin = float(best_r.min())
    close = np.argwhere(best_r <= rmin + 2 * err.max())
    cands = [(int(a_rows[i]), int(b_axis[j]), int(best_c[i, j]), float(best_r[i, j])) for i, j in close]
    zero_cands = np.argwhere(best_r <= err)
    zeros = [(int(a_rows[i]), int(b_axis[j]), int(best_c[i, j])) for i, j in zero_cands]
    return cands, counts, zeros, float(err.max())


def scan_obstruction(spec: WaveOperatorSpec, H: int, tau_grid, threads: int = 1,
                     c_max: int | None = None) -> ObstructionReport:
    """Exhaustive scan of the residual over the box 1 <= |a|, |b| <= H,
    |c| <= c_max (default H).

    Even exponents only need a, b >= 1 (the residual is sign-blind); odd ones
    are scanned over both signs. Modes with a = 0 or b = 0 are not scanned.
    The best residual is the minimum over the scan, ties going to the
    lexicographically smallest (a, b, c).
    """
    if not isinstance(H, (int, np.integer)) or H < 1:
        raise InvalidArgument(f"H must be a positive integer, got {H!r}")
    H = int(H)
    taus = [float(t) for t in tau_grid]
    if not taus or any(not t > 1 for t in taus):
        raise InvalidArgument(f"tau_grid must be non-empty with every tau > 1, got {taus}")
    c_max = H if c_max is None else int(c_max)
    if c_max < 0:
        raise InvalidArgument(f"c_max must be >= 0, got {c_max}")
    e = spec.exponents
    if float(max(H, c_max)) ** max(e.n, e.m, e.p) > MAX_HEIGHT:
        raise HeightRangeError(f"H^{max(e.n, e.m, e.p)} exceeds 2^62")
    a_axis, b_axis = _axis(H, e.n), _axis(H, e.m)
    rows = max(1, (1 << 20) // len(b_axis))
    jobs = [(spec, a_axis[i:i + rows], b_axis, taus, c_max) for i in range(0, len(a_axis), rows)]
    parts = ordered_map(_scan_rows, jobs, threads)

    counts = [sum(p[1][k] for p in parts) for k in range(len(taus))]
    err = max(p[3] for p in parts)
    cands = [c for p in parts for c in p[0]]
    if spec.is_rational:
        scored = [(_exact_residual(spec, a, b, c), (a, b, c)) for a, b, c, _ in cands]
        res, trip = min(scored, key=lambda s: (s[0], s[1]))
        exact = any(_exact_residual(spec, a, b, c) == 0 for p in parts for a, b, c in p[2])
        best = {"a": trip[0], "b": trip[1], "c": trip[2], "residual": _num(res)}
        err = 0.0
    else:
        rmin = min(r for *_, r in cands)
        trip = min((a, b, c) for a, b, c, r in cands if r == rmin)
        exact = rmin == 0.0
        best = {"a": trip[0], "b": trip[1], "c": trip[2], "residual": rmin}
    notes = ["modes with a = 0 or b = 0 are not scanned"]
    if e.n % 2 == 0 and e.m % 2 == 0:
        notes.append("even exponents: scanned a, b >= 1 only (residual is sign-blind)")
    if not spec.is_rational:
        notes.append("floating-point scan; residuals carry the reported error bar")
    notes.append(f"c ranges over |c| <= {c_max}")
    return ObstructionReport(
        H=H, best=best, hits=[{"tau": t, "count": c} for t, c in zip(taus, counts)],
        exact_resonance=bool(exact), error_bar=err, scanned_pairs=len(a_axis) * len(b_axis),
        spec=spec.describe(), notes=notes)


def solubility_advisory(spec: WaveOperatorSpec, H: int, tau: float, threads: int = 1,
                        c_max: int | None = None) -> dict:
    """Finite-scan advisory on small-denominator obstructions. Never a proof."""
    c_max = H if c_max is None else c_max
    full = scan_obstruction(spec, H, [tau], threads, c_max)
    # hits with max(|a|, |b|) in (H/2, H]: total minus the scan up to floor(H/2)
    inner = (scan_obstruction(spec, H // 2, [tau], threads, c_max).hits[0]["count"]
             if H >= 2 else 0)
    top_hits = full.hits[0]["count"] - inner
    e = spec.exponents
    cls, thr = convergence_classify_power_law(e, tau)
    if full.exact_resonance:
        status = "obstruction-present"
        text = (f"exact resonance at (a, b, c) = ({full.best['a']}, {full.best['b']}, {full.best['c']}): "
                "the smooth-solubility guarantee fails for this operator")
    elif top_hits == 0:
        status = "no-obstruction-detected"
        text = (f"no near-resonance with residual < max(|a|,|b|)^-{tau:g} for max(|a|,|b|) in "
                f"({H // 2}, {H}]: no obstruction detected up to H={H}. This is a finite-scan "
                "heuristic, not a proof.")
    else:
        status = "near-resonances-present"
        text = (f"{top_hits} near-resonances with max(|a|,|b|) in ({H // 2}, {H}] at tau={tau:g}; "
                "a finite scan cannot decide whether they continue indefinitely.")
    context = ("for almost every pair of frequency ratios, only finitely many modes satisfy the "
               f"tau={tau:g} condition, since the associated series is {cls} "
               f"(threshold tau*={thr:g})")
    return {
        "status": status,
        "text": text,
        "context": context,
        "flags": {"exact_resonance": full.exact_resonance, "hits_total": full.hits[0]["count"],
                  "hits_top_band": top_hits, "series": cls, "heuristic": True},
        "report": full.to_dict(),
    }
