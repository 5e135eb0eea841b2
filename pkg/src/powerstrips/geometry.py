"""Strip/disk geometry: c-ranges, exact strip-disk areas, angle regimes between
strip families, and Monte Carlo estimates of pairwise overlaps."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._parallel import ordered_map
from .errors import InvalidArgument, ResourceLimitError, UndefinedRatioError
from .forms import ApproxFunction, Exponents, height

GRID = 16
MAX_PAIR_LOOP = 1_000_000


@dataclass(frozen=True)
class Ball:
    """Open disk with centre (x0, y0) and radius r, sitting inside [eps, 1]^2, r < eps."""

    x0: float
    y0: float
    r: float
    eps: float

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise InvalidArgument(f"eps must lie in (0, 1), got {self.eps}")
        if not 0 < self.r < self.eps:
            raise InvalidArgument(f"radius must satisfy 0 < r < eps, got r={self.r}, eps={self.eps}")
        for c in (self.x0, self.y0):
            if c - self.r < self.eps or c + self.r > 1:
                raise InvalidArgument(f"ball ({self.x0}, {self.y0}; {self.r}) leaves [{self.eps}, 1]^2")

    @property
    def area(self) -> float:
        return math.pi * self.r ** 2

    def half(self) -> "Ball":
        return Ball(self.x0, self.y0, self.r / 2, self.eps)


@dataclass(frozen=True)
class Strip:
    """{(x, y) : |a^n x + b^m y - c^p| < w}."""

    a: int
    b: int
    c: int
    e: Exponents
    w: float

    @property
    def coeffs(self) -> tuple[int, int]:
        return self.a ** self.e.n, self.b ** self.e.m

    @property
    def norm(self) -> float:
        A, B = self.coeffs
        return math.sqrt(A * A + B * B)

    @property
    def half_width(self) -> float:
        return self.w / self.norm


@dataclass(frozen=True)
class StripUnion:
    """All strips of one pair (a, b) with width psi(h_{a,b})."""

    a: int
    b: int
    e: Exponents
    psi: ApproxFunction

    @property
    def h(self) -> int:
        return height((self.a, self.b), self.e)

    @property
    def width(self) -> float:
        return float(self.psi(float(self.h)))

    def contains(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        A, B = float(self.a ** self.e.n), float(self.b ** self.e.m)
        return power_distance(A * x + B * y, self.e.p) < self.width


def power_distance(t: np.ndarray, p: int) -> np.ndarray:
    """min_{c >= 0} |t - c^p| for t >= 0 (elementwise)."""
    t = np.asarray(t, dtype=np.float64)
    if p == 1:
        return np.abs(t - np.rint(t))
    c0 = np.floor(np.power(t, 1.0 / p))
    best = np.full(t.shape, np.inf)
    for off in (-1.0, 0.0, 1.0, 2.0):
        c = np.maximum(c0 + off, 0.0)
        best = np.minimum(best, np.abs(t - c ** p))
    return best


@dataclass(frozen=True)
class CRange:
    lo: int
    hi: int
    count: int
    near_miss: tuple[int, ...]
    interval_length: float


def _first_power_above(x: float, p: int) -> int:
    """Smallest c >= 0 with c^p > x."""
    if x < 0:
        return 0
    c = int(math.floor(x ** (1.0 / p)))
    while c > 0 and (c - 1) ** p > x:
        c -= 1
    while c ** p <= x:
        c += 1
    return c


def _last_power_below(x: float, p: int) -> int:
    """Largest c >= 0 with c^p < x, or -1 if none."""
    if x <= 0:
        return -1
    c = int(math.floor(x ** (1.0 / p))) + 1
    while c ** p >= x:
        c -= 1
    while (c + 1) ** p < x:
        c += 1
    return c


def c_range(pair: tuple[int, int], e: Exponents, ball: Ball,
            psi: ApproxFunction | None = None) -> CRange:
    """Integers c whose line a^n x + b^m y = c^p crosses the open ball.

    With ``psi`` given, ``near_miss`` lists the c whose line misses the ball
    but passes within 2 psi(h)/|(a^n, b^m)| + r of its centre.
    """
    a, b = pair
    A, B = a ** e.n, b ** e.m
    R = math.sqrt(A * A + B * B)
    L0 = A * ball.x0 + B * ball.y0
    lower, upper = L0 - ball.r * R, L0 + ball.r * R
    lo = _first_power_above(lower, e.p)
    hi = _last_power_below(upper, e.p)
    count = max(0, hi - lo + 1)
    near: tuple[int, ...] = ()
    if psi is not None:
        w = float(psi(float(max(A, B))))
        extra = set(range(_first_power_above(lower - 2 * w - 1e-300, e.p), lo))
        top = _last_power_below(upper + 2 * w, e.p)
        # c^p == upper exactly also lies within the closed distance bound
        if (hi + 1) ** e.p <= upper + 2 * w:
            top = max(top, hi + 1)
        extra |= set(range(hi + 1, top + 1))
        near = tuple(sorted(c for c in extra if c >= 0 and abs(L0 - c ** e.p) <= 2 * w + ball.r * R))
    length = upper ** (1.0 / e.p) - max(lower, 0.0) ** (1.0 / e.p)
    return CRange(lo, hi, count, near, length)


def c_bounds_window(h: float, p: int, eps: float) -> tuple[float, float]:
    """eps^(1/p) h^(1/p) / 2 < c < 3 h^(1/p): where c must lie once psi(h) < eps."""
    root = h ** (1.0 / p)
    return eps ** (1.0 / p) / 2 * root, 3 * root


def interval_length_lower_bound(pair: tuple[int, int], e: Exponents, ball: Ball) -> float:
    """r (a^{2n} + b^{2m})^{1/(2p)} / 2^{1 - 2/p}."""
    a, b = pair
    A, B = a ** e.n, b ** e.m
    return ball.r * (A * A + B * B) ** (1.0 / (2 * e.p)) / 2 ** (1 - 2 / e.p)


def measured_interval_constant(pair: tuple[int, int], e: Exponents, ball: Ball) -> float:
    """The constant C implied by the observed interval length in
    length <= 2 C r (a^{2n}+b^{2m})^{1/(2p)} / eps^(1 - 1/p)."""
    a, b = pair
    A, B = a ** e.n, b ** e.m
    length = c_range(pair, e, ball).interval_length
    return length * ball.eps ** (1 - 1 / e.p) / (2 * ball.r * (A * A + B * B) ** (1.0 / (2 * e.p)))


def line_spacing(pair: tuple[int, int], e: Exponents, c: int) -> float:
    """Distance between the parallel lines for c and c + 1."""
    a, b = pair
    A, B = a ** e.n, b ** e.m
    return ((c + 1) ** e.p - c ** e.p) / math.sqrt(A * A + B * B)


# ---------------------------------------------------------------------------
# exact areas

def band_area(r: float, t1, dt) -> np.ndarray:
    """Area of the part of a radius-r disk whose offset along a fixed normal
    lies in (t1, t1 + dt). Written in terms of dt so thin bands keep full
    relative precision."""
    t1 = np.asarray(t1, dtype=np.float64)
    dt = np.broadcast_to(np.asarray(dt, dtype=np.float64), t1.shape)
    t2 = t1 + dt
    u = np.maximum(t1, -r)
    v = np.minimum(t2, r)
    clipped = (t1 < -r) | (t2 > r)
    w = np.where(clipped, v - u, dt)
    out = np.zeros(t1.shape)
    ok = w > 0
    if not np.any(ok):
        return out
    u, v, w = u[ok], v[ok], w[ok]
    su = np.sqrt(np.maximum((r - u) * (r + u), 0.0))
    sv = np.sqrt(np.maximum((r - v) * (r + v), 0.0))
    den = su + sv
    with np.errstate(invalid="ignore", divide="ignore"):
        q = np.where(den > 0, (u + v) / den, 0.0)
    area = w * sv - u * w * q + r * r * np.arctan2(w * (su + u * q), su * sv + u * v)
    full = den == 0  # both ends on the rim: the band is the whole disk
    area = np.where(full, math.pi * r * r, area)
    out[ok] = area
    return out


def strip_ball_measure(strip: Strip, ball: Ball) -> float:
    """Exact area of strip intersect ball."""
    A, B = strip.coeffs
    R = strip.norm
    d0 = (A * ball.x0 + B * ball.y0 - strip.c ** strip.e.p) / R
    om = strip.w / R
    return float(band_area(ball.r, -d0 - om, 2 * om))


def _union_terms(a: int, b: int, e: Exponents, w: float, ball: Ball):
    A, B = a ** e.n, b ** e.m
    R = math.sqrt(A * A + B * B)
    L0 = A * ball.x0 + B * ball.y0
    lo = _first_power_above(L0 - ball.r * R - w, e.p)
    hi = _last_power_below(L0 + ball.r * R + w, e.p)
    if hi < lo:
        return np.zeros(0), np.zeros(0, dtype=np.int64)
    c = np.arange(lo, hi + 1, dtype=np.int64)
    cp = c.astype(np.float64) ** e.p if e.p > 1 else c.astype(np.float64)
    d0 = (L0 - cp) / R
    om = w / R
    return band_area(ball.r, -d0 - om, 2 * om), c


def strip_union_ball_measure(pair: tuple[int, int], e: Exponents, psi: ApproxFunction,
                             ball: Ball) -> float:
    """|l_{a,b} intersect B|: the strips for distinct c are disjoint, so this is
    the sum of the single-strip areas."""
    a, b = pair
    w = float(psi(float(height(pair, e))))
    areas, _ = _union_terms(a, b, e, w, ball)
    return math.fsum(areas)


def normalised_union_measure(pair: tuple[int, int], e: Exponents, psi: ApproxFunction,
                             ball: Ball) -> float:
    """|l_{a,b} intersect B| / (|B| psi(h) / h^(1 - 1/p))."""
    h = height(pair, e)
    scale = ball.area * float(psi(float(h))) / float(h) ** (1 - 1 / e.p)
    return strip_union_ball_measure(pair, e, psi, ball) / scale


# ---------------------------------------------------------------------------
# angles

@dataclass(frozen=True)
class AngleInfo:
    sin_alpha: float
    regime: str
    determinant: int
    reduced_determinant: int
    h1: int
    h2: int


def angle_between(pair1: tuple[int, int], pair2: tuple[int, int], e: Exponents,
                  radius: float) -> AngleInfo:
    """Angle between (a1^n, b1^m) and (a2^n, b2^m) and its regime for a ball of
    the given radius. Pairs are swapped so that h1 <= h2."""
    if tuple(pair1) == tuple(pair2):
        raise InvalidArgument("angle between identical pairs")
    h1, h2 = height(pair1, e), height(pair2, e)
    if h1 > h2:
        pair1, pair2, h1, h2 = pair2, pair1, h2, h1
    (a1, b1), (a2, b2) = pair1, pair2
    A1, B1, A2, B2 = a1 ** e.n, b1 ** e.m, a2 ** e.n, b2 ** e.m
    det = A1 * B2 - A2 * B1
    k = e.k
    red = a1 ** (e.n // k) * b2 ** (e.m // k) - a2 ** (e.n // k) * b1 ** (e.m // k)
    if det == 0:
        raise ArithmeticError(f"parallel strip families for {pair1}, {pair2}")
    sin_a = abs(det) / (math.sqrt(A1 * A1 + B1 * B1) * math.sqrt(A2 * A2 + B2 * B2))
    p, N, M = e.p, e.N, e.M
    large_cut = 1.0 / (radius * h1 ** (1.0 / p))
    small_cut = 1.0 / (radius ** (1 + k / M) * h1 ** (k / (p * N)) * h2 ** (1.0 / p))
    if sin_a >= large_cut:
        regime = "large"
    elif sin_a >= small_cut:
        regime = "medium"
    else:
        regime = "small"
    return AngleInfo(sin_a, regime, det, abs(red), h1, h2)


# ---------------------------------------------------------------------------
# Monte Carlo

def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed), counter=[0, 0, int(stream), 0]))


def _stratified_points(ball: Ball, per_cell: int, rng: np.random.Generator):
    side = 2 * ball.r / GRID
    i, j = np.meshgrid(np.arange(GRID), np.arange(GRID), indexing="ij")
    ox = (ball.x0 - ball.r + side * i).reshape(-1, 1)
    oy = (ball.y0 - ball.r + side * j).reshape(-1, 1)
    u = rng.random((GRID * GRID, per_cell, 2))
    x = ox + side * u[..., 0]
    y = oy + side * u[..., 1]
    inside = (x - ball.x0) ** 2 + (y - ball.y0) ** 2 < ball.r ** 2
    return x, y, inside, side * side


def _stratified_estimate(values: np.ndarray, cell_area: float) -> tuple[float, float]:
    """values: (cells, per_cell) samples of the integrand."""
    k = values.shape[1]
    means = values.mean(axis=1)
    var = values.var(axis=1, ddof=1) if k > 1 else np.zeros_like(means)
    est = math.fsum(cell_area * means)
    ci = 1.96 * math.sqrt(math.fsum(cell_area ** 2 * var / k))
    return est, ci


def pair_intersection_measure(u1: StripUnion, u2: StripUnion, ball: Ball, samples: int = 65536,
                              seed: int = 0, stream: int = 0) -> tuple[float, float]:
    """Stratified Monte Carlo estimate of |l1 intersect l2 intersect B| with a 95% half-width."""
    if samples < 10_000:
        raise InvalidArgument(f"need at least 1e4 samples, got {samples}")
    per_cell = samples // (GRID * GRID)
    x, y, inside, cell_area = _stratified_points(ball, per_cell, _rng(seed, stream))
    hit = inside & u1.contains(x, y) & u2.contains(x, y)
    return _stratified_estimate(hit.astype(np.float64), cell_area)


def strip_ball_measure_mc(strip: Strip, ball: Ball, samples: int = 1_000_000,
                          seed: int = 0, stream: int = 0) -> tuple[float, float]:
    """Monte Carlo counterpart of ``strip_ball_measure`` (used as its oracle)."""
    per_cell = samples // (GRID * GRID)
    x, y, inside, cell_area = _stratified_points(ball, per_cell, _rng(seed, stream))
    A, B = strip.coeffs
    hit = inside & (np.abs(A * x + B * y - strip.c ** strip.e.p) < strip.w)
    return _stratified_estimate(hit.astype(np.float64), cell_area)


@dataclass(frozen=True)
class QuasiIndependence:
    ratio: float
    ratio_ci95: float
    pair_overlap_sum: float
    single_sum: float
    n_pairs: int
    method: str


def _restricted_pairs(e: Exponents, H: int):
    from .enumeration import pair_arrays

    a, b, _ = pair_arrays(e, H, restricted_only=True)
    return list(zip(a.tolist(), b.tolist()))


def _occupancy_chunk(args):
    x, y, inside, coef_a, coef_b, widths, p = args
    occ = np.zeros(x.shape, dtype=np.int64)
    for A, B, w in zip(coef_a, coef_b, widths):
        occ += power_distance(A * x + B * y, p) < w
    return np.where(inside, occ, 0)


def quasi_independence_ratio(e: Exponents, psi: ApproxFunction, ball: Ball, H: int,
                             samples: int = 65536, seed: int = 0, method: str = "occupancy",
                             restricted: bool = True, threads: int = 1) -> QuasiIndependence:
    """|B| * sum_{i != j} |l_i cap l_j cap B| / (sum_i |l_i cap B|)^2 over pairs with h <= H.

    The single-strip sum is exact. The overlap sum is either a per-pair Monte
    Carlo loop (``method="pairs"``) or, equivalently, the integral over B of
    N(N - 1) where N(x) counts the strip families containing x
    (``method="occupancy"``), which scales to many more pairs.
    """
    if restricted:
        pairs = _restricted_pairs(e, H)
    else:
        from .enumeration import pair_arrays

        a, b, _ = pair_arrays(e, H)
        pairs = list(zip(a.tolist(), b.tolist()))
    if method == "pairs" and len(pairs) * (len(pairs) - 1) // 2 > MAX_PAIR_LOOP:
        raise ResourceLimitError(f"{len(pairs)} strip families exceed the pair-loop budget {MAX_PAIR_LOOP}")
    singles = math.fsum(strip_union_ball_measure(pq, e, psi, ball) for pq in pairs)
    if singles <= 0:
        raise UndefinedRatioError("no strip meets the ball")
    if len(pairs) < 2:
        return QuasiIndependence(0.0, 0.0, 0.0, singles, len(pairs), method)

    if method == "pairs":
        unions = [StripUnion(a, b, e, psi) for a, b in pairs]
        jobs = [(i, j) for i in range(len(unions)) for j in range(i + 1, len(unions))]

        def one(ij):
            i, j = ij
            return pair_intersection_measure(unions[i], unions[j], ball, samples, seed,
                                             stream=i * len(unions) + j)

        res = ordered_map(one, jobs, threads)
        overlap = 2 * math.fsum(r[0] for r in res)
        ci = 2 * math.sqrt(math.fsum((r[1] / 1.96) ** 2 for r in res)) * 1.96
    elif method == "occupancy":
        per_cell = max(samples // (GRID * GRID), 2)
        x, y, inside, cell_area = _stratified_points(ball, per_cell, _rng(seed, 0))
        coef_a = [float(a ** e.n) for a, _ in pairs]
        coef_b = [float(b ** e.m) for _, b in pairs]
        widths = [float(psi(float(height(pq, e)))) for pq in pairs]
        step = 64
        chunks = [(x, y, inside, coef_a[i:i + step], coef_b[i:i + step], widths[i:i + step], e.p)
                  for i in range(0, len(pairs), step)]
        parts = ordered_map(_occupancy_chunk, chunks, threads)
        # N(N-1) is not additive over chunks, so sum N first (integer, order free)
        occ = np.sum(parts, axis=0)
        occ = occ * (occ - 1)
        overlap, ci = _stratified_estimate(occ.astype(np.float64), cell_area)
    else:
        raise InvalidArgument(f"unknown method {method!r}")
    ratio = ball.area * overlap / singles ** 2
    return QuasiIndependence(ratio, ball.area * ci / singles ** 2, overlap, singles, len(pairs), method)
