"""Command line entry point.

Exit codes: 0 when every check passes, 1 when a check finds a violation,
2 for usage and domain errors.  Reports go to stdout or ``--out``; progress
and diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction

import numpy as np

from . import DEFAULT_SAMPLES, DEFAULT_SEED, convexity_geom as cg, kepler_maps as km, kernels, pcr3bp_scan as ps
from .errors import BracketError, DegenerateFrameError, DomainError, RootBracketError
from .reports import dumps, table_csv, write_report

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2

DEFAULT_A_GRID = "0.01:0.99:100"
DEFAULT_C_GRID = "-1.500000001:-10:100"
F3_COLUMNS = ["a", "a2", "c", "case", "N", "f3", "bound", "f3_bound", "pass"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _count(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("count must be >= 1")
    return v


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma separated list of numbers: {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def parse_grid(text: str) -> list[float]:
    """``lo:hi:n`` (n points, both ends included) or a comma separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"grid must be lo:hi:n, got {text!r}")
        try:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None
        if n < 1:
            raise argparse.ArgumentTypeError("grid needs at least one point")
        return [float(v) for v in np.linspace(lo, hi, n)]
    return _float_list(text)


def _common(p):
    p.add_argument("--jobs", type=int, default=kernels.default_jobs(), help="worker threads (default: all cores)")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kepler-convexity", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    verify = sub.add_parser("verify", help="exact identities and map properties")
    vsub = verify.add_subparsers(dest="what", required=True, parser_class=_Parser)
    vi = vsub.add_parser("identity", help="exact polynomial identities")
    _common(vi)
    vm = vsub.add_parser("maps", help="Ligon-Schaaf, symplecticity and energy checks")
    vm.add_argument("--samples", type=_count, default=10_000)
    vm.add_argument("--sym-samples", type=_count, default=1000)
    vm.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    vm.add_argument("--tol", type=float, default=1e-9)
    _common(vm)

    certify = sub.add_parser("certify", help="sampled convexity certificate")
    csub = certify.add_subparsers(dest="what", required=True, parser_class=_Parser)
    cr = csub.add_parser("rkp", help="rotating Kepler surface F = 0")
    cr.add_argument("--energy", type=float, required=True)
    cr.add_argument("--samples", type=_count, default=DEFAULT_SAMPLES)
    cr.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    _common(cr)

    scan = sub.add_parser("scan", help="restricted three-body scan")
    ssub = scan.add_subparsers(dest="what", required=True, parser_class=_Parser)
    sr = ssub.add_parser("r3bp")
    sr.add_argument("--mu", type=_float_list, required=True)
    sr.add_argument("--fractions", type=_float_list, required=True)
    sr.add_argument("--samples", type=_count, default=DEFAULT_SAMPLES)
    sr.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    sr.add_argument("--primary", choices=("heavy", "light"), default="heavy")
    sr.add_argument("--c-ref-offset", type=float, default=ps.C_REF_OFFSET)
    _common(sr)

    control = sub.add_parser("control", help="negative control")
    tsub = control.add_subparsers(dest="what", required=True, parser_class=_Parser)
    tl = tsub.add_parser("direct-lc")
    tl.add_argument("--energies", type=_float_list, required=True)
    tl.add_argument("--samples", type=_count, default=DEFAULT_SAMPLES)
    tl.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    _common(tl)

    analyze = sub.add_parser("analyze", help="case analysis tables")
    asub = analyze.add_subparsers(dest="what", required=True, parser_class=_Parser)
    af = asub.add_parser("f3")
    af.add_argument("--a-grid", type=parse_grid, default=parse_grid(DEFAULT_A_GRID))
    af.add_argument("--c-grid", type=parse_grid, default=parse_grid(DEFAULT_C_GRID))
    _common(af)
    return parser


# ---------------------------------------------------------------------------
# commands; each returns (report dict, csv text or None, ok)


def _log(msg: str):
    print(msg, file=sys.stderr, flush=True)


def cmd_verify_identity(args):
    t0 = time.perf_counter()
    sym = cg.build_symbolic()  # raises ConstructionError if a g_i - dF_i fails
    grad_ok = all((sym.a * g - d).is_zero() for g, d in zip(sym.g, sym.dF))
    fac = cg.verify_factorization()
    ids = cg.exact_factor_identities()
    axis = cg.axis_value_a2(cg.AXIS_SPLIT)
    axis_ok = abs(float(axis) - 1.1028) <= 5e-4
    ok = grad_ok and fac.outcome is not cg.Outcome.FAILURE and all(ids.values()) and axis_ok
    _log(f"factorization: {fac.outcome.value} ({time.perf_counter() - t0:.2f}s)")
    rep = {
        "sigma": km.ANGULAR_SIGN,
        "gradient_identity": grad_ok,
        "factorization": fac.as_dict(),
        "f_identities": ids,
        "axis_value_at_7_18": float(axis),
        "axis_value_exact": str(Fraction(axis)),
        "pass": ok,
    }
    return rep, None, ok


def cmd_verify_maps(args):
    rep = km.map_property_suite(args.samples, args.sym_samples, args.seed, args.tol)
    ok = all(rep[k]["pass"] for k in ("ligon_schaaf", "symplecticity", "energy", "two_to_one"))
    rep["pass"] = ok
    return rep, None, ok


def cmd_certify_rkp(args):
    cert = cg.certify_convexity(args.energy, args.samples, args.seed, jobs=args.jobs)
    return cert.as_dict(), None, cert.passed


def cmd_scan_r3bp(args):
    for f in args.fractions:
        if not 0.0 < f < 1.0:
            raise DomainError(f"fraction {f} outside (0, 1)")
    for mu in args.mu:
        if not 0.0 < mu < 1.0:
            raise DomainError(f"mass ratio {mu} outside (0, 1)")
    tab = ps.scan_grid(args.mu, args.fractions, args.samples, args.seed, args.jobs, args.primary, args.c_ref_offset)
    for r in tab.rows:
        if r.error:
            _log(f"row mu={r.mu} fraction={r.fraction}: {r.error}")
    rep = tab.as_dict()
    rep["pass"] = tab.all_pass
    return rep, tab.to_csv(), tab.all_pass


def cmd_control_direct_lc(args):
    rep = ps.direct_lc_control(args.energies, args.samples, args.seed, jobs=args.jobs)
    deepest = min(rep.rows, key=lambda r: r.energy)
    met = rep.direct_fails_somewhere and deepest.direct_pass and rep.composed_all_pass
    d = rep.as_dict()
    d["deepest_direct_pass"] = deepest.direct_pass
    d["expectation_met"] = met
    d["pass"] = met
    cols = ["energy", "direct_min_eig", "direct_min_det", "direct_pass", "composed_min_eig", "composed_pass", "samples", "skipped"]
    return d, table_csv([r.as_dict() for r in rep.rows], cols), met


def analyze_f3(a_grid, c_grid) -> list[dict]:
    """One record per (a, c) cell; cells with a^2 = 7/18 are evaluated under both cases."""
    for a in a_grid:
        if not 0.0 < a < 1.0:
            raise DomainError(f"a = {a} outside (0, 1)")
    for c in c_grid:
        if not c < km.CRITICAL_VALUE:
            raise DomainError(f"c = {c} is not below -3/2")
    split = float(cg.AXIS_SPLIT)
    out = []
    for a in a_grid:
        a2 = a * a
        cases = ("crit", "axis") if abs(a2 - split) <= 1e-12 else (None,)
        for c in c_grid:
            for case in cases:
                r = cg.f3_analysis(a, c, case)
                f3_bound = r["bound"] / (4 * a**6)
                ok = r["f3"] > 0 and r["f3"] >= f3_bound - 1e-9 * max(1.0, abs(f3_bound))
                out.append(
                    {
                        "a": a,
                        "a2": a2,
                        "c": c,
                        "case": r["case"],
                        "N": r["N"],
                        "f3": r["f3"],
                        "bound": r["bound"],
                        "f3_bound": f3_bound,
                        "pass": bool(ok and r["pass"]),
                    }
                )
    return out


def cmd_analyze_f3(args):
    rows = analyze_f3(args.a_grid, args.c_grid)
    fails = [r for r in rows if not r["pass"]]
    ok = not fails
    rep = {
        "sigma": km.ANGULAR_SIGN,
        "cells": len(rows),
        "failures": len(fails),
        "min_f3": min(r["f3"] for r in rows),
        "pass": ok,
        "rows": rows,
    }
    return rep, table_csv(rows, F3_COLUMNS), ok


COMMANDS = {
    ("verify", "identity"): (cmd_verify_identity, "json"),
    ("verify", "maps"): (cmd_verify_maps, "json"),
    ("certify", "rkp"): (cmd_certify_rkp, "json"),
    ("scan", "r3bp"): (cmd_scan_r3bp, "csv"),
    ("control", "direct-lc"): (cmd_control_direct_lc, "json"),
    ("analyze", "f3"): (cmd_analyze_f3, "json"),
}
CSV_COMMANDS = {("scan", "r3bp"), ("control", "direct-lc"), ("analyze", "f3")}


_VALUE_FLAGS = ("--energy", "--energies", "--mu", "--fractions", "--a-grid", "--c-grid", "--c-ref-offset")


def _glue_negative(argv: list[str]) -> list[str]:
    """Turn ``--energies -1.6,-2`` into ``--energies=-1.6,-2`` so argparse
    does not read the value as an option."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") and argv[i + 1][1:2] in "0123456789.":
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    argv = _glue_negative(list(sys.argv[1:] if argv is None else argv))
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        _log(f"kepler-convexity: error: {exc}")
        return EXIT_USAGE
    if args.jobs < 1:
        _log("kepler-convexity: error: --jobs must be >= 1")
        return EXIT_USAGE
    fn, default_fmt = COMMANDS[(args.command, args.what)]
    fmt = args.format or default_fmt
    if fmt == "csv" and (args.command, args.what) not in CSV_COMMANDS:
        _log(f"kepler-convexity: error: no CSV form for '{args.command} {args.what}'")
        return EXIT_USAGE
    try:
        rep, csv_text, ok = fn(args)
    except (DomainError, BracketError) as exc:
        _log(f"kepler-convexity: domain error: {exc}")
        return EXIT_USAGE
    except (RootBracketError, DegenerateFrameError) as exc:
        _log(f"kepler-convexity: sampling failed: {exc}")
        return EXIT_VIOLATION
    try:
        write_report(csv_text if fmt == "csv" else dumps(rep), args.out)
    except OSError as exc:
        _log(f"kepler-convexity: cannot write report: {exc}")
        return EXIT_USAGE
    if not ok:
        _log("kepler-convexity: violation found")
    return EXIT_OK if ok else EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
