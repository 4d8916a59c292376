"""Command-line entry point: ``sawlab enumerate | analyze | ingest``.

Exit codes: 0 success, 2 invalid input, 3 enumeration capacity exceeded.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import analysis as an
from . import approximants as da
from . import seriesio as sio
from .enumeration import (
    BivariateCounts,
    EnumConfig,
    EnumerationOverflowError,
    enumerate_series,
    enumerate_two_layer,
)
from .lattice import LatticeKind, WalkClass

EXIT_INVALID = 2
EXIT_OVERFLOW = 3


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {v}")
    return v


def _env_threads() -> int | None:
    raw = os.environ.get("SAWLAB_THREADS")
    if not raw:
        return None
    try:
        return _positive_int(raw)
    except argparse.ArgumentTypeError as e:
        raise UsageError(f"SAWLAB_THREADS: {e}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        sio.atomic_write(Path(out), text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# --------------------------------------------------------------------------
# enumerate


def cmd_enumerate(args) -> int:
    lattice = LatticeKind(args.lattice)
    cls = WalkClass(args.walk_class)
    if lattice is LatticeKind.TWO_LAYER and cls is not WalkClass.SAW:
        raise UsageError("the two-layer lattice supports --class saw only")
    threads = args.threads or _env_threads()
    cache_dir = args.cache_dir or os.environ.get("SAWLAB_CACHE_DIR")
    cache = sio.RunCache(cache_dir) if cache_dir else None
    if cache is not None:
        hit = cache.lookup(lattice.value, cls.value, args.n_max)
        if hit is not None:
            print(f"cache hit: {hit[1].series_path} ({hit[1].digest[:12]})", file=sys.stderr)
            _emit(hit[0], args.out)
            return 0
    try:
        cfg = EnumConfig(args.n_max, args.prefix_depth, thread_hint=threads)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if lattice is LatticeKind.TWO_LAYER:
        result, wall = sio.timed(enumerate_two_layer, cfg)
    else:
        result, wall = sio.timed(enumerate_series, lattice, cls, cfg)
    text = sio.format_series(result)
    if cache is not None:
        cache.store(lattice.value, cls.value, args.n_max, text, wall, cfg.threads)
    _emit(text, args.out)
    print(f"enumerated n <= {args.n_max} in {wall:.2f}s ({sio.digest(text)[:12]})", file=sys.stderr)
    return 0


# --------------------------------------------------------------------------
# analyze


def _load(path: str, bivariate: bool = False):
    try:
        s = sio.read_series(path)
    except OSError as e:
        raise UsageError(f"{path}: {e.strerror}") from None
    except sio.SeriesFormatError as e:
        raise UsageError(f"{path}: {e}") from None
    if bivariate != isinstance(s, BivariateCounts):
        raise UsageError(f"{path}: expected a {'bivariate' if bivariate else 'univariate'} series file")
    return s


def _analyze_ratios(args) -> str:
    s = _load(args.series)
    rep = an.ratio_of_ratios(s, step=args.step)
    for w in rep.warnings:
        print(f"warning: {w}", file=sys.stderr)
    rows = [r for r in rep.rows if r.r_minus_one is not None]
    if not rows:
        raise UsageError("series too short for ratio-of-ratios")
    if args.transform == "both":
        return sio.format_plot_csv([(r.n, r.inv_n, r.inv_n2, r.r_minus_one) for r in rows],
                                   ("n", "inv_n", "inv_n2", "r_minus_one"))
    return sio.format_plot_csv([(r.n, getattr(r, args.transform), r.r_minus_one) for r in rows],
                               ("n", args.transform, "r_minus_one"))


def _analyze_convexity(args) -> str:
    rep = an.check_log_convex(_load(args.series), args.parity)
    return _json(rep.to_json())


def _analyze_supermult(args) -> str:
    return _json(an.check_supermultiplicative(_load(args.series)).to_json())


def _analyze_mubound(args) -> str:
    s = _load(args.series)
    bounds = an.ratio_bounds(s, args.parity)
    if not bounds:
        raise UsageError("series too short for a ratio bound")
    n = max(bounds)
    return _json({"parity": args.parity, "n": n, "bound": bounds[n]})


def _analyze_exponent(args) -> str:
    s = _load(args.series)
    if args.unbiased:
        bias = None
    elif args.critical_point is not None:
        bias = args.critical_point
    elif s.lattice is LatticeKind.SQUARE:
        bias = an.REFERENCE.z_c
    elif s.lattice is LatticeKind.TRIANGULAR:
        bias = 1.0 / an.REFERENCE.mu_triangular
    else:
        bias = None
    coeffs = da.series_coefficients(s)
    sweep = da.exponent_sweep(coeffs, args.order, bias, min_terms=args.min_terms)
    if not sweep.estimates:
        raise UsageError("no usable approximants for this series")
    summary = {"order": args.order, "bias": bias, "fits": len(sweep.estimates),
               "failures": sweep.failures, "median": sweep.median}
    print(json.dumps(summary, sort_keys=True), file=sys.stderr)
    return sio.format_plot_csv([(n, 1.0 / n, lam) for n, lam in sweep.estimates],
                               ("n", "inv_n", "exponent"))


def _analyze_kappa(args) -> str:
    bi = _load(args.series, bivariate=True)
    growth, rows = {}, []
    for p in sorted(set(args.p)):
        if not 0.0 < p < 1.0:
            raise UsageError(f"p must lie in (0, 1): {p}")
        est = an.estimate_kappa(bi, p, args.weighting, args.depth)
        growth[p] = est.growth
        rows.append((p, -p * math.log(p), est.kappa - an.REFERENCE.kappa, est.growth))
    if args.weighted_out:
        table = []
        for p in sorted(growth):
            table += [(n, p, w) for n, w in an.weighted_two_layer_series(bi, p, args.weighting).items()]
        sio.atomic_write(Path(args.weighted_out), sio.format_plot_csv(table, ("n", "p", "W_n")))
    if len(growth) >= 3:
        fit = an.kappa_fit(growth)
        print(json.dumps({"slope": fit.slope, "intercept": fit.intercept}), file=sys.stderr)
    return sio.format_plot_csv(rows, ("p", "neg_p_log_p", "kappa_shift", "growth"))


ANALYSES = {
    "ratios": _analyze_ratios,
    "convexity": _analyze_convexity,
    "supermult": _analyze_supermult,
    "mubound": _analyze_mubound,
    "exponent": _analyze_exponent,
    "kappa": _analyze_kappa,
}


def cmd_analyze(args) -> int:
    try:
        text = ANALYSES[args.analysis](args)
    except (ValueError, da.DefectiveApproximant) as e:
        raise UsageError(str(e)) from None
    _emit(text, args.out)
    return 0


# --------------------------------------------------------------------------
# ingest


def cmd_ingest(args) -> int:
    lattice = LatticeKind(args.lattice) if args.lattice else None
    try:
        s = sio.ingest_external(args.source, lattice, WalkClass(args.walk_class), args.format,
                                args.column, args.allow_network)
    except (sio.SeriesFormatError, OSError) as e:
        raise UsageError(str(e)) from None
    _emit(sio.format_series(s, sio.source_note(args.source)), args.out)
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sawlab", description="Exact enumeration and series analysis of lattice walks.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("enumerate", help="count walks up to a given length")
    e.add_argument("--lattice", required=True, choices=[k.value for k in LatticeKind])
    e.add_argument("--class", dest="walk_class", default="saw", choices=[c.value for c in WalkClass])
    e.add_argument("--n-max", required=True, type=_positive_int)
    e.add_argument("--threads", type=_positive_int, help="worker threads (env SAWLAB_THREADS)")
    e.add_argument("--prefix-depth", type=_positive_int)
    e.add_argument("--out", help="output series file (default: stdout)")
    e.add_argument("--cache-dir", help="run cache directory (env SAWLAB_CACHE_DIR)")
    e.set_defaults(func=cmd_enumerate)

    a = sub.add_parser("analyze", help="analyse a series file")
    asub = a.add_subparsers(dest="analysis", required=True)

    def add(name, help_):
        sp = asub.add_parser(name, help=help_)
        sp.add_argument("series", help="series file")
        sp.add_argument("--out", help="output file (default: stdout)")
        return sp

    sp = add("ratios", "r_n - 1 against 1/n and 1/n^2 (CSV)")
    sp.add_argument("--step", type=_positive_int, default=2)
    sp.add_argument("--transform", choices=["inv_n", "inv_n2", "both"], default="both")
    sp = add("convexity", "log-convexity report (JSON)")
    sp.add_argument("--parity", choices=["all", "even", "odd"], default="all")
    add("supermult", "super-multiplicativity report (JSON)")
    sp = add("mubound", "ratio lower bound on the growth constant (JSON)")
    sp.add_argument("--parity", choices=["all", "even", "odd"], default="all")
    sp = add("exponent", "differential-approximant exponent sweep (CSV)")
    sp.add_argument("--order", type=int, choices=[1, 2], default=2)
    sp.add_argument("--critical-point", type=float, help="bias the fits at this z_c")
    sp.add_argument("--unbiased", action="store_true")
    sp.add_argument("--min-terms", type=_positive_int, default=20)
    sp = add("kappa", "two-layer growth rates against -p log p (CSV)")
    sp.add_argument("--p", type=float, nargs="+", default=[0.02, 0.05, 0.10, 0.15])
    sp.add_argument("--weighting", choices=list(an.WEIGHTINGS), default="fugacity")
    sp.add_argument("--depth", type=int, default=3)
    sp.add_argument("--weighted-out", help="also write the weighted series W_n(p) as CSV")
    a.set_defaults(func=cmd_analyze)

    g = sub.add_parser("ingest", help="convert an external (n, count) listing to a series file")
    g.add_argument("source", help="file path or URL")
    g.add_argument("--out")
    g.add_argument("--lattice", choices=[k.value for k in LatticeKind])
    g.add_argument("--class", dest="walk_class", default="saw", choices=[c.value for c in WalkClass])
    g.add_argument("--format", choices=["auto", "csv", "whitespace"], default="auto")
    g.add_argument("--column", type=_positive_int, default=1, help="0-based column holding counts")
    g.add_argument("--allow-network", action="store_true")
    g.set_defaults(func=cmd_ingest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"sawlab: error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except EnumerationOverflowError as e:
        print(f"sawlab: error: {e}", file=sys.stderr)
        return EXIT_OVERFLOW


if __name__ == "__main__":
    sys.exit(main())
