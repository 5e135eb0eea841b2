"""Command-line front end. Every run prints one deterministic report that
embeds the resolved configuration and the package version."""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (HeightRangeError, HypothesisError, InvalidArgument, ResourceLimitError,
                     TruncatedDomainError, UndefinedRatioError, UnsupportedFunction)
from .forms import ApproxFunction, Exponents, PowerLaw, Tabulated

EXIT_OK, EXIT_INVALID, EXIT_RESOURCE = 0, 2, 3
VALIDATION_ERRORS = (InvalidArgument, HypothesisError, TruncatedDomainError, UnsupportedFunction,
                     HeightRangeError, UndefinedRatioError)


@dataclass
class RunConfig:
    """Resolved flags. ``threads`` is deliberately not part of the recorded
    configuration: it changes wall time only, and recording it would make
    otherwise identical runs differ byte for byte."""

    subcommand: str
    n: int
    m: int
    p: int
    psi: str
    tau: float | None
    H: int | None
    s: float | None
    seed: int
    samples: int
    ball: tuple[float, float, float, float] | None
    format: str
    options: dict = field(default_factory=dict)

    @property
    def exponents(self) -> Exponents:
        return Exponents(self.n, self.m, self.p)

    def approx_function(self) -> ApproxFunction:
        if self.psi == "power":
            if self.tau is None:
                raise InvalidArgument("--psi power needs --tau")
            return PowerLaw(self.tau)
        if self.psi.startswith("table:"):
            return load_psi_table(self.psi[len("table:"):])
        raise InvalidArgument(f"unknown --psi {self.psi!r}; use 'power' or 'table:FILE'")


def load_psi_table(path: str) -> Tabulated:
    """Two-column CSV (height, psi); a non-numeric first row is taken as a header."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidArgument(f"cannot read psi table {path!r}: {exc}") from exc
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if rows:
        try:
            float(rows[0][0])
        except ValueError:
            rows = rows[1:]
    if not rows:
        raise InvalidArgument(f"psi table {path!r} is empty")
    try:
        hs = [float(r[0]) for r in rows]
        vs = [float(r[1]) for r in rows]
    except (ValueError, IndexError) as exc:
        raise InvalidArgument(f"psi table {path!r} needs two numeric columns") from exc
    return Tabulated(hs, vs)


# ---------------------------------------------------------------------------
# deterministic serialisation

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if x is None:
        return "null"
    if isinstance(x, (int, np.integer)):
        x = int(x)
        return f'"{x}"' if abs(x) > 2 ** 53 else str(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x) or math.isinf(x):
            return f'"{x}"'
        return format(x, ".17g")
    if isinstance(x, Fraction):
        return f'"{x}"'
    if isinstance(x, str):
        return _json_str(x)
    if isinstance(x, dict):
        items = sorted(x.items(), key=lambda kv: str(kv[0]))
        return "{" + ", ".join(f"{_json_str(str(k))}: {_fmt(v)}" for k, v in items) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    raise TypeError(f"cannot serialise {type(x).__name__}")


def _json_str(s: str) -> str:
    import json

    return json.dumps(s)


def to_json(obj) -> str:
    """JSON with floats at 17 significant digits and big integers as strings."""
    return _fmt(obj) + "\n"


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for r in rows:
        wr.writerow([format(v, ".17g") if isinstance(v, float) else v for v in r])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# subcommands: each returns (json_payload, csv_table or None)

def run_classify(cfg: RunConfig):
    from .forms import delta_window, lower_order, regime_classify

    e = cfg.exponents
    tau = cfg.tau
    if tau is None and cfg.psi.startswith("table:"):
        tau = lower_order(cfg.approx_function()).value
    rep = regime_classify(e, tau)
    out = asdict(rep)
    out["exponent_sum"] = float(e.exponent_sum)
    if rep.theorem_applicable and not rep.always_null:
        out["delta_window"] = delta_window(e)
    return out, None


def run_sums(cfg: RunConfig):
    from .forms import hausdorff_sum_partial, lebesgue_sum_partial

    e, psi, H = cfg.exponents, cfg.approx_function(), cfg.H or 2 ** 16
    restricted = cfg.options["restricted"]
    if cfg.options["kind"] == "hausdorff":
        if cfg.s is None:
            raise InvalidArgument("hausdorff sums need --s")
        ser = hausdorff_sum_partial(e, psi, cfg.s, H, restricted=restricted)
    else:
        ser = lebesgue_sum_partial(e, psi, H, restricted=restricted)
    try:
        slope = ser.tail_slope()
    except InvalidArgument:
        slope = None
    out = {"kind": ser.kind, "s": ser.s, "restricted": restricted, "heights": ser.heights,
           "partial_sums": ser.partial_sums, "total": ser.total,
           "last_block_increment": ser.last_block_increment(), "saturates": ser.saturates(),
           "tail_slope": slope}
    return out, to_csv(["h", "partial_sum"], ser.as_rows())


def run_solutions(cfg: RunConfig, threads: int):
    from .enumeration import find_solutions, hit_profile

    e, psi, H = cfg.exponents, cfg.approx_function(), cfg.H or 1000
    o = cfg.options
    if o["x"] is None or o["y"] is None:
        raise InvalidArgument("solutions needs --x and --y")
    sols = find_solutions(o["x"], o["y"], e, psi, H, o["restricted"], o["exclude_zero"], threads)
    prof = hit_profile(o["x"], o["y"], e, psi, H, o["restricted"], o["exclude_zero"], threads)
    out = {"count": len(sols), "solutions": [asdict(s) for s in sols],
           "profile": [{"H": h, "hits": k} for h, k in prof]}
    rows = [(s.a, s.b, s.c, s.h, s.residual, s.bound) for s in sols]
    return out, to_csv(["a", "b", "c", "h", "residual", "bound"], rows)


def run_restricted(cfg: RunConfig):
    from .enumeration import dyadic_counts, restricted_ratio_series

    e = cfg.exponents
    t_max = cfg.options["t_max"]
    counts = [dyadic_counts(e, t) for t in range(t_max + 1)]
    rows = [(d.t, d.alpha, d.beta, d.alpha / 2.0 ** ((e.n / e.m + 1) * d.t),
             d.beta / 2.0 ** ((e.m / e.n + 1) * d.t)) for d in counts]
    out = {"dyadic": [{"t": r[0], "alpha": r[1], "beta": r[2], "alpha_scaled": r[3],
                       "beta_scaled": r[4]} for r in rows]}
    if cfg.tau is not None or cfg.psi != "power":
        ratio = restricted_ratio_series(e, cfg.approx_function(), cfg.H or 2 ** 16)
        out["restricted_ratio"] = [{"H": h, "ratio": r} for h, r in ratio]
    return out, to_csv(["t", "alpha", "beta", "alpha_scaled", "beta_scaled"], rows)


def _ball(cfg: RunConfig):
    from .geometry import Ball

    if cfg.ball is None:
        raise InvalidArgument("this subcommand needs --ball x0,y0,r,eps")
    return Ball(*cfg.ball)


def run_strips(cfg: RunConfig, threads: int):
    from .geometry import (c_range, normalised_union_measure, quasi_independence_ratio,
                           strip_union_ball_measure)

    e, psi, ball = cfg.exponents, cfg.approx_function(), _ball(cfg)
    o = cfg.options
    out: dict = {"ball_area": ball.area}
    if o["a"] is not None and o["b"] is not None:
        pair = (o["a"], o["b"])
        cr = c_range(pair, e, ball, psi)
        out["pair"] = {"a": pair[0], "b": pair[1], "c_range": asdict(cr),
                       "measure": strip_union_ball_measure(pair, e, psi, ball),
                       "normalised": normalised_union_measure(pair, e, psi, ball)}
    if o["quasi"]:
        q = quasi_independence_ratio(e, psi, ball, cfg.H or 2 ** 6, samples=cfg.samples,
                                     seed=cfg.seed, method=o["method"], threads=threads)
        out["quasi_independence"] = asdict(q)
    return out, None


def run_boxdim(cfg: RunConfig, threads: int):
    from .fractal import critical_exponent_from_sums, estimate_dimension

    if cfg.tau is None:
        raise InvalidArgument("boxdim needs --tau")
    e = cfg.exponents
    o = cfg.options
    rep = estimate_dimension(e, cfg.tau, range(o["j_min"], o["j_max"] + 1), threads=threads)
    out = {"box_count": asdict(rep)}
    if not o["no_sums"]:
        out["s_star"] = critical_exponent_from_sums(e, cfg.tau, cfg.H or 2 ** 20)
    return out, rep.to_csv()


def run_pde(cfg: RunConfig, threads: int):
    from .pde import WaveOperatorSpec, scan_obstruction, solubility_advisory

    o = cfg.options
    e = Exponents(2, 2, 2) if o["classical"] else cfg.exponents
    if o["u"] is not None or o["v"] is not None:
        if o["u"] is None or o["v"] is None:
            raise InvalidArgument("give both --u and --v")
        spec = WaveOperatorSpec.from_ratios(_number(o["u"]), _number(o["v"]), e)
    else:
        spec = WaveOperatorSpec.from_periods(_number(o["alpha"]), _number(o["beta"]),
                                             _number(o["gamma"]), e)
    H = cfg.H or 10
    taus = o["tau_grid"] or [2.0, 3.0]
    rep = scan_obstruction(spec, H, taus, threads)
    out = rep.to_dict()
    adv_tau = cfg.tau if cfg.tau is not None and cfg.tau > 1 else taus[-1]
    out["advisory"] = {k: v for k, v in solubility_advisory(spec, H, adv_tau, threads).items()
                       if k != "report"}
    return out, None


def _number(text: str):
    """Exact rational for plain decimals and fractions, float otherwise
    (e.g. 'sqrt2' style inputs are not parsed; pass a decimal)."""
    if text is None:
        raise InvalidArgument("missing period")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        pass
    try:
        return float(text)
    except ValueError as exc:
        raise InvalidArgument(f"not a number: {text!r}") from exc


def run_arith_check(cfg: RunConfig):
    from .arith import (ZETA2, cached_tables, coprime_errors, divisor_summatory,
                        mobius_weighted_sums, pochhammer_bound_check, totient_power_sum)

    o = cfg.options
    Q = o["Q"]
    T = cached_tables(max(Q, o["t_max"]))
    worst = 0.0
    violations = 0
    for t in range(1, o["t_max"] + 1):
        eps = np.abs(coprime_errors(t, o["coprime_Q"], T))
        d = int(T.divisor_count[t])
        violations += int(np.sum(eps > d))
        worst = max(worst, float(eps.max()) / d)
    tot = {}
    for z in (0.5, 1.0, 2.0):
        row = {}
        for q in sorted({min(100, Q), Q}):
            val, main = totient_power_sum(z, q, T)
            row[str(q)] = abs(float(val) - main) / q ** z
        tot[format(z, "g")] = row
    s1, s2 = mobius_weighted_sums(Q, T)
    dsum, dmain = divisor_summatory(Q)
    gammas = [round(0.1 * i, 1) for i in range(1, 10)]
    poch = {format(g, "g"): pochhammer_bound_check(g, o["t_pochhammer"]) for g in gammas}
    out = {
        "coprime_bound": {"t_max": o["t_max"], "Q_max": o["coprime_Q"], "violations": violations,
                          "worst_ratio": worst, "pass": violations == 0},
        "totient_scaled_errors": tot,
        "mobius_sums": {"Q": Q, "s1": s1, "s2": s2, "s2_minus_inverse_zeta2": s2 - 1 / ZETA2},
        "divisor_summatory": {"Q": Q, "sum": dsum, "Q_log_Q": dmain,
                              "relative_error": (dsum - dmain) / dmain if Q > 1 else None},
        "pochhammer": {"t_max": o["t_pochhammer"], "worst_ratio": poch,
                       "pass": all(v <= 1 for v in poch.values())},
    }
    return out, None


# ---------------------------------------------------------------------------
# argument parsing

def _ball_arg(text: str):
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"--ball expects x0,y0,r,eps: {text!r}") from exc
    if len(vals) != 4:
        raise argparse.ArgumentTypeError(f"--ball expects four numbers, got {len(vals)}")
    return vals


def _float_list(text: str):
    try:
        return [float(v) for v in text.split(",") if v]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=1)
    common.add_argument("--m", type=int, default=1)
    common.add_argument("--p", type=int, default=1)
    common.add_argument("--tau", type=float)
    common.add_argument("--psi", default="power", help="power | table:FILE")
    common.add_argument("--H", type=int)
    common.add_argument("--s", type=float)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=65536)
    common.add_argument("--ball", type=_ball_arg)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out")

    parser = argparse.ArgumentParser(prog="powerstrips", description=__doc__)
    parser.add_argument("--version", action="version", version=f"powerstrips {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sub.add_parser("classify", parents=[common], help="regime, convergence class and dimension")

    sp = sub.add_parser("sums", parents=[common], help="Lebesgue/Hausdorff partial sums")
    sp.add_argument("--kind", choices=("lebesgue", "hausdorff"), default="lebesgue")
    sp.add_argument("--restricted", action="store_true")

    sp = sub.add_parser("solutions", parents=[common], help="solutions at a point")
    sp.add_argument("--x", type=float)
    sp.add_argument("--y", type=float)
    sp.add_argument("--restricted", action="store_true")
    sp.add_argument("--exclude-zero", action="store_true")

    sp = sub.add_parser("restricted", parents=[common], help="dyadic counts of the restricted set")
    sp.add_argument("--t-max", type=int, default=10)

    sp = sub.add_parser("strips", parents=[common], help="strip/ball measures")
    sp.add_argument("--a", type=int)
    sp.add_argument("--b", type=int)
    sp.add_argument("--quasi", action="store_true", help="also estimate the quasi-independence ratio")
    sp.add_argument("--method", choices=("occupancy", "pairs"), default="occupancy")

    sp = sub.add_parser("boxdim", parents=[common], help="box counting and critical exponent")
    sp.add_argument("--j-min", type=int, default=4)
    sp.add_argument("--j-max", type=int, default=12)
    sp.add_argument("--no-sums", action="store_true")

    sp = sub.add_parser("pde", parents=[common], help="resonance scan for the wave-type operator")
    sp.add_argument("--classical", action="store_true", help="n = m = p = 2")
    sp.add_argument("--alpha", default="1")
    sp.add_argument("--beta", default="1")
    sp.add_argument("--gamma", default="1")
    sp.add_argument("--u")
    sp.add_argument("--v")
    sp.add_argument("--tau-grid", type=_float_list)

    sp = sub.add_parser("arith-check", parents=[common], help="arithmetic invariant suites")
    sp.add_argument("--Q", type=int, default=10 ** 5)
    sp.add_argument("--t-max", type=int, default=200)
    sp.add_argument("--coprime-Q", type=int, default=10 ** 4)
    sp.add_argument("--t-pochhammer", type=int, default=10 ** 4)
    return parser


_GLOBAL = {"n", "m", "p", "tau", "psi", "H", "s", "seed", "samples", "ball", "threads", "format",
           "out", "subcommand"}


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    options = {k: v for k, v in vars(ns).items() if k not in _GLOBAL}
    if ns.threads < 1:
        raise InvalidArgument(f"--threads must be >= 1, got {ns.threads}")
    if ns.H is not None and ns.H < 1:
        raise InvalidArgument(f"--H must be >= 1, got {ns.H}")
    if ns.samples < 1:
        raise InvalidArgument(f"--samples must be >= 1, got {ns.samples}")
    if options.get("classical"):
        ns.n = ns.m = ns.p = 2
    cfg = RunConfig(subcommand=ns.subcommand, n=ns.n, m=ns.m, p=ns.p, psi=ns.psi, tau=ns.tau,
                    H=ns.H, s=ns.s, seed=ns.seed, samples=ns.samples, ball=ns.ball,
                    format=ns.format, options=options)
    cfg.exponents  # validates n, m, p
    return cfg


_RUNNERS = {
    "classify": lambda c, t: run_classify(c),
    "sums": lambda c, t: run_sums(c),
    "solutions": run_solutions,
    "restricted": lambda c, t: run_restricted(c),
    "strips": run_strips,
    "boxdim": run_boxdim,
    "pde": run_pde,
    "arith-check": lambda c, t: run_arith_check(c),
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = resolve_config(ns)
        payload, table = _RUNNERS[cfg.subcommand](cfg, ns.threads)
        if cfg.format == "csv":
            if table is None:
                raise InvalidArgument(f"{cfg.subcommand} has no series output; use --format json")
            text = table
        else:
            text = to_json({"version": __version__, "config": asdict(cfg), "result": payload})
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ResourceLimitError, MemoryError) as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    if ns.out:
        Path(ns.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
