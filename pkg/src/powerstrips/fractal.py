"""Box counting of truncated limsup sets and critical exponents from the
Hausdorff partial sums."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._parallel import ordered_map
from .errors import InvalidArgument, ResourceLimitError, UnsupportedFunction
from .forms import (ApproxFunction, Exponents, PowerLaw, check_height_bound,
                    dimension_formula, hausdorff_sum_partial, iroot, regime_classify)

MAX_BITMAP_BITS = 2 ** 32
# bound on (#lines) * 2^j, roughly the number of row intervals produced
MAX_RASTER_WORK = 2 ** 26
MAX_DIFF_BYTES = 2 ** 30
# the same bound for the bitmap path, which trades memory for time
MAX_BITMAP_WORK = 2 ** 31


def _band_pairs(e: Exponents, lo: float, hi: int):
    """Pairs with lo < h <= hi as arrays (A, B, h) of int64."""
    A, B = iroot(hi, e.n), iroot(hi, e.m)
    a = np.arange(1, A + 1, dtype=np.int64)
    b = np.arange(1, B + 1, dtype=np.int64)
    an = (a ** e.n)[:, None]
    bm = (b ** e.m)[None, :]
    h = np.maximum(an, bm)
    keep = (h > lo) & (h <= hi)
    an = np.broadcast_to(an, h.shape)[keep]
    bm = np.broadcast_to(bm, h.shape)[keep]
    return an, bm, h[keep]


def _raster_pair(args):
    """Difference-array rows for one line family: conservative box/strip contact."""
    A, B, w, p, M = args
    top = A + B + w
    c_hi = int(math.floor(top ** (1.0 / p))) + 1
    c = np.arange(0, c_hi + 1, dtype=np.float64)
    cp = c ** p
    cp = cp[(cp > -w) & (cp < top)]
    if cp.size == 0:
        return None
    i = np.arange(M, dtype=np.float64)
    # box (i, k) meets the strip around cp iff lo < k < hi
    lo = (M * (cp[:, None] - w) - A * (i[None, :] + 1)) / B - 1
    hi = (M * (cp[:, None] + w) - A * i[None, :]) / B
    k0 = np.maximum(np.floor(lo).astype(np.int64) + 1, 0)
    k1 = np.minimum(np.ceil(hi).astype(np.int64) - 1, M - 1)
    ok = k1 >= k0
    cols = np.broadcast_to(i.astype(np.int64)[None, :], lo.shape)[ok]
    return cols, k0[ok], k1[ok]


def truncated_cover(e: Exponents, psi: ApproxFunction, H: float, j: int,
                    lower: float | None = None, threads: int = 1) -> np.ndarray:
    """Boolean (2^j, 2^j) bitmap indexed [x-box, y-box] of the dyadic boxes whose
    closed square meets an open strip |a^n x + b^m y - c^p| < psi(h) with
    h in (lower, H]. ``lower`` defaults to H / 2.
    """
    if j < 0:
        raise InvalidArgument(f"resolution j must be >= 0, got {j}")
    M = 1 << j
    if M * M > MAX_BITMAP_BITS or M * (M + 1) * 4 > MAX_DIFF_BYTES:
        raise ResourceLimitError(f"a 2^{j} x 2^{j} cover exceeds the memory budget")
    cover = np.zeros((M, M), dtype=bool)
    jobs = _band_jobs(e, psi, H, j, lower, budget=MAX_BITMAP_WORK)
    if not jobs:
        return cover
    diff = np.zeros((M, M + 1), dtype=np.int32)
    # difference-array updates commute, so batching never changes the result
    batch = max(1, threads) * 16
    for i in range(0, len(jobs), batch):
        for part in ordered_map(_raster_pair, jobs[i:i + batch], threads):
            if part is None:
                continue
            cols, k0, k1 = part
            np.add.at(diff, (cols, k0), 1)
            np.add.at(diff, (cols, k1 + 1), -1)
    cover[:] = np.cumsum(diff, axis=1)[:, :M] > 0
    return cover


def _band_jobs(e: Exponents, psi: ApproxFunction, H: float, j: int, lower: float | None,
               budget: float):
    M = 1 << j
    Hi = check_height_bound(int(math.floor(H)))
    lo = H / 2 if lower is None else lower
    an, bm, h = _band_pairs(e, lo, Hi)
    if h.size == 0:
        return []
    w = np.asarray(psi(h.astype(np.float64)), dtype=np.float64)
    lines = float(np.sum((an + bm).astype(np.float64) ** (1.0 / e.p) + 2))
    if lines * M > budget:
        raise ResourceLimitError(f"rasterizing ~{lines:.3g} lines at 2^{j} is over budget")
    return [(float(A), float(B), float(ww), e.p, M) for A, B, ww in zip(an, bm, np.atleast_1d(w))]


def cover_count(e: Exponents, psi: ApproxFunction, H: float, j: int,
                lower: float | None = None, threads: int = 1) -> int:
    """Number of occupied boxes in ``truncated_cover`` without building the
    bitmap: per-column row intervals are merged and their lengths summed."""
    if j < 0:
        raise InvalidArgument(f"resolution j must be >= 0, got {j}")
    M = 1 << j
    try:
        jobs = _band_jobs(e, psi, H, j, lower, budget=MAX_RASTER_WORK)
    except ResourceLimitError:
        # dense band: the bitmap is the cheaper representation
        return int(truncated_cover(e, psi, H, j, lower, threads).sum())
    parts = [q for q in ordered_map(_raster_pair, jobs, threads) if q is not None]
    if not parts:
        return 0
    col = np.concatenate([q[0] for q in parts])
    # separate columns by a gap so intervals never merge across them
    base = col * (M + 2)
    k0 = base + np.concatenate([q[1] for q in parts])
    k1 = base + np.concatenate([q[2] for q in parts])
    del col, base, parts
    order = np.argsort(k0, kind="stable")
    k0, k1 = k0[order], k1[order]
    reach = np.maximum.accumulate(k1)
    prev = np.empty_like(reach)
    prev[0] = -1
    prev[1:] = reach[:-1]
    return int(np.sum(np.maximum(k1 - np.maximum(k0 - 1, prev), 0)))


@dataclass
class BoxCountReport:
    resolutions: list[float]
    counts: list[int]
    slope: float
    window: tuple[int, int]
    js: list[int]
    heights: list[list[float]]
    method: str
    exponents: tuple[int, int, int]
    tau: float
    in_hypothesis: bool
    formula: float | None = None
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["j", "delta", "count"])
        for j, d, n in zip(self.js, self.resolutions, self.counts):
            wr.writerow([j, repr(d), n])
        return buf.getvalue()


def matched_height(e: Exponents, tau: float, j: int) -> int:
    """Largest attained height H with psi(H)/H >= 2^-j, i.e. strips at least
    about 2^-j wide. Never below the smallest height exceeding 1, so the band
    (H/2, H] is non-empty and excludes the degenerate pair (1, 1)."""
    x = 2.0 ** (j / (tau + 1))
    X = int(math.floor(x * (1 + 1e-12)))
    best = min(2 ** e.n, 2 ** e.m)
    cands = [iroot(X, e.n) ** e.n, iroot(X, e.m) ** e.m] if X >= 1 else []
    return max([best] + cands)


def fit_slope(js, counts) -> float:
    x = np.asarray(js, dtype=np.float64) * math.log(2)
    y = np.log(np.asarray(counts, dtype=np.float64))
    return float(np.polyfit(x, y, 1)[0])


def estimate_dimension(e: Exponents, tau: float, j_list, H_list=None, method: str = "matched",
                       threads: int = 1) -> BoxCountReport:
    """Box-counting slope of a truncated version of W for psi(h) = h^-tau.

    ``method="matched"`` covers scale 2^-j by the height band (H_j/2, H_j]
    whose strips are about 2^-j wide. ``method="intersect"`` keeps the boxes
    occupied at every band (H/2, H] for H in ``H_list``, at every scale.
    The fit drops the two coarsest scales and the finest one.
    """
    js = sorted(int(j) for j in j_list)
    if len(js) - 3 < 3:
        raise InvalidArgument(f"need at least 6 resolutions for a 3-point fit window, got {len(js)}")
    psi = PowerLaw(tau)
    counts, heights = [], []
    for j in js:
        if method == "matched":
            Hs = [float(matched_height(e, tau, j))]
        elif method == "intersect":
            if not H_list:
                raise InvalidArgument("method 'intersect' needs H_list")
            Hs = [float(H) for H in H_list]
        else:
            raise InvalidArgument(f"unknown method {method!r}")
        if len(Hs) == 1:
            counts.append(cover_count(e, psi, Hs[0], j, threads=threads))
        else:
            cover = truncated_cover(e, psi, Hs[0], j, threads=threads)
            for H in Hs[1:]:
                cover &= truncated_cover(e, psi, H, j, threads=threads)
            counts.append(int(cover.sum()))
        heights.append(Hs)
    win = js[2:-1]
    wcounts = counts[2:-1]
    notes = []
    if min(wcounts) == 0:
        raise InvalidArgument("empty cover inside the fit window; raise the heights")
    slope = fit_slope(win, wcounts)
    in_hyp = tau > 1
    if not in_hyp:
        notes.append("tau <= 1: outside the hypothesis of the dimension formula")
    rep = regime_classify(e, tau)
    formula = None
    if rep.dimension_applicable:
        formula = dimension_formula(e, tau)
    else:
        notes.append("exponents outside the dimension hypothesis")
    return BoxCountReport(
        resolutions=[2.0 ** -j for j in js], counts=counts, slope=slope, window=(win[0], win[-1]),
        js=js, heights=heights, method=method, exponents=e.as_tuple(), tau=float(tau),
        in_hypothesis=in_hyp, formula=formula, notes=notes)


def _as_tau(psi) -> float:
    if isinstance(psi, PowerLaw):
        return psi.tau
    if isinstance(psi, ApproxFunction):
        raise UnsupportedFunction(f"critical exponent needs a pure power law, got {type(psi).__name__}")
    return float(psi)


def series_grows(e: Exponents, psi: ApproxFunction, s: float, H_max: int,
                 detector: str = "slope", slope_tol: float = 0.005,
                 block_tol: float = 1e-3) -> bool:
    """Whether the Hausdorff partial sums at exponent s still grow at H_max.

    ``"slope"`` fits the log2 of the dyadic block increments over the upper
    half of the checkpoints; a series is growing unless the fitted slope per
    doubling is below ``-slope_tol``. ``"block"`` compares the last block
    increment with ``block_tol`` times the running sum.
    """
    series = hausdorff_sum_partial(e, psi, s, H_max)
    if detector == "slope":
        return series.tail_slope() >= -slope_tol
    if detector == "block":
        return not series.saturates(block_tol)
    raise InvalidArgument(f"unknown detector {detector!r}")


def critical_exponent_from_sums(e: Exponents, tau, H_max: int = 2 ** 20, tol: float = 0.01,
                                detector: str = "slope") -> float:
    """Transition exponent s* in (1, 2] between growing and saturating
    Hausdorff partial sums, located by bisection to within ``tol``."""
    tau = _as_tau(tau)
    if not tau > 0:
        raise InvalidArgument(f"tau must be > 0, got {tau}")
    psi = PowerLaw(tau)
    if series_grows(e, psi, 2.0, H_max, detector):
        return 2.0
    lo, hi = 1.0, 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if series_grows(e, psi, mid, H_max, detector):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
