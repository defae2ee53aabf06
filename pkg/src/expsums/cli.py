"""Command-line entry point: ``expsums <subcommand> ...``.

Exit codes: 0 when every asserted check of the subcommand passes, 1 on a
check failure or a computation error, 2 on a usage error.  JSON is the
canonical output format; rationals are emitted as "p/q" strings.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional, Sequence

from . import acceptance, bounds, lattice, planner, sums, tables
from .exactmath import Q, fmt

OUTPUT_DIR_ENV = "EXPSUMS_OUTPUT_DIR"


class CheckFailed(Exception):
    """Raised by a subcommand whose asserted check did not hold."""


@dataclass
class Output:
    payload: Any  # dict/list for JSON, or list of rows (first row = header) for CSV
    ok: bool = True
    default_format: str = "json"
    name: str = "report"


# --------------------------------------------------------------------------
# formatting

def _jsonable(x):
    if isinstance(x, Fraction):
        return fmt(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if hasattr(x, "item") and callable(x.item):  # numpy scalars
        return x.item()
    return x


def _flatten(d, prefix="") -> list[list[str]]:
    rows = []
    if isinstance(d, dict):
        for k, v in d.items():
            rows += _flatten(v, f"{prefix}{k}.")
    elif isinstance(d, list) and d and all(isinstance(v, (dict, list)) for v in d):
        for i, v in enumerate(d):
            rows += _flatten(v, f"{prefix}{i}.")
    else:
        rows.append([prefix.rstrip("."), json.dumps(d) if isinstance(d, list) else str(d)])
    return rows


def render(out: Output, fmt_name: Optional[str]) -> str:
    f = fmt_name or out.default_format
    payload = out.payload
    if f == "json":
        if isinstance(payload, list) and payload and isinstance(payload[0], list):
            header, *rows = payload
            payload = [dict(zip(header, r)) for r in rows]
        return json.dumps(_jsonable(payload), indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if isinstance(payload, list) and payload and isinstance(payload[0], list):
        w.writerows(payload)
    else:
        w.writerow(["key", "value"])
        w.writerows(_flatten(_jsonable(payload)))
    return buf.getvalue()


# --------------------------------------------------------------------------
# argument types

def rational(s: str) -> Fraction:
    try:
        return Q(s)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"not an exact rational: {s!r} ({exc})")


def number(s: str):
    """int if integral-looking, Fraction for p/q, else float."""
    try:
        if "/" in s:
            return Q(s)
        if s.lstrip("-").isdigit():
            return int(s)
        v = float(s)
        return int(v) if v.is_integer() and "e" in s.lower() and abs(v) < 2**63 else v
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}")


# --------------------------------------------------------------------------
# subcommands

def cmd_identities(args) -> Output:
    recs = tables.identity_suite(args.theta)
    rows = [["name", "kind", "lhs", "rhs", "holds"]] + [r.row() for r in recs]
    return Output(rows, all(r.holds for r in recs), "csv", "identities")


def cmd_bounds_eval(args) -> Output:
    b = bounds.build_bound(args.id, args.nu)
    val = bounds.eval_exponent(b, args.h, args.m)
    region = bounds.region_check(b, args.h, args.m, args.logT)
    return Output({"id": b.id, "nu": b.nu, "target": b.target, "h": args.h, "m": args.m,
                   "exponent": val, "region": region.as_dict(), "bound": b.as_dict()}, name="bounds-eval")


def cmd_bounds_theta(args) -> Output:
    r = bounds.derive_theta()
    ok = r.theta == tables.THETA and r.balance == Fraction(71, 206)
    return Output({"theta": r.theta, "balance": r.balance, "theta_decimal": float(r.theta)}, ok, name="bounds-theta")


def cmd_bounds_replay7(args) -> Output:
    c = bounds.replay_section7(args.grid, workers=args.threads)
    ok = c.ok and c.max_min_exponent == tables.THETA and c.argmax_on_balance_line
    return Output(c.as_dict(), ok, name="bounds-replay7")


def cmd_bounds_replay8(args) -> Output:
    r = bounds.replay_section8()
    return Output(r.as_dict(), r.ok, name="bounds-replay8")


def cmd_bounds_remark(args) -> Output:
    pts = bounds.sample_remark_points(args.samples, seed=args.seed)
    r = bounds.remark_ratios(args.nu, pts)
    return Output(r.as_dict(), not r.violations(), name="bounds-remark")


def cmd_bounds_exppair(args) -> Output:
    k, l = bounds.exponent_pair(args.word, (args.k, args.l))
    return Output({"word": args.word, "seed": [args.k, args.l], "pair": [k, l]}, name="bounds-exppair")


_CONST_KEYS = ("C1", "C2", "C3", "C4", "C5", "B0", "B5", "B6", "B7prime")


def cmd_plan(args) -> Output:
    if args.nstar:
        return Output(planner.nstar_fallback(args.H, args.M, args.T).as_dict(), name="plan-nstar")
    consts = {k: getattr(args, k) for k in _CONST_KEYS if getattr(args, k) is not None}
    rep = planner.plan(planner.PlannerInput(args.H, args.M, args.T, args.case, consts), args.nu)
    return Output(rep.as_dict(), name="plan")


def _sum_output(res: sums.SumResult, name: str) -> Output:
    ok = abs(res.value) <= res.weight_sum * (1 + 1e-12) + 1e-12
    return Output(res.as_dict(), ok, name=name)


def cmd_sum_s7(args) -> Output:
    job = sums.SumJob("S_sec7", H=args.H, M=args.M, T=args.T, a=args.a, b=args.b)
    return _sum_output(sums.eval_sum(job, args.method, workers=args.threads), "sum-s7")


def cmd_sum_star(args) -> Output:
    job = sums.SumJob("S_star", H=args.H, M=args.M, T=args.T, H1=args.H1, M1=args.M1)
    return _sum_output(sums.eval_sum(job, "float", workers=args.threads), "sum-star")


def cmd_sum_general(args) -> Output:
    kw = {}
    if args.g:
        kw["g"] = sums.tabulated([float(v) for v in args.g.split(",")])
    if args.G:
        kw["G"] = sums.tabulated([float(v) for v in args.G.split(",")])
    job = sums.SumJob("S_general", H=args.H, M=args.M, T=args.T, a=args.a, b=args.b, phase=args.phase, **kw)
    return _sum_output(sums.eval_sum(job, "auto", workers=args.threads), "sum-general")


def cmd_sum_fit(args) -> Output:
    if args.input:
        with open(args.input, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
        if rows and not _is_number(rows[0][0]):
            rows = rows[1:]
        samples = [(float(r[0]), float(r[1])) for r in rows]
        return Output({"n": len(samples), "slope": sums.fit_exponent(samples), "report_only": True}, name="sum-fit")
    samples = []
    for T in args.Ts:
        H, M = T ** float(args.h), T ** float(args.m)
        res = sums.eval_sum(sums.SumJob("S_sec7", H=H, M=M, T=T, a=args.a, b=args.b), workers=args.threads)
        samples.append((float(T), abs(res.value) / H))
    exp, bid = bounds.min_applicable(args.h, args.m)
    return Output({"h": args.h, "m": args.m, "samples": [{"T": t, "abs_S_over_H": v} for t, v in samples],
                   "slope": sums.fit_exponent(samples), "bound_exponent": exp, "bound_id": bid,
                   "report_only": True}, name="sum-fit")


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def cmd_lattice_divisor(args) -> Output:
    D = lattice.divisor_sum(args.X, args.method, workers=args.threads)
    out = {"X": args.X, "method": args.method, "D": D}
    if args.X >= 4:
        out["report"] = lattice.delta_report(args.X).as_dict()
    return Output(out, name="lattice-divisor")


def cmd_lattice_circle(args) -> Output:
    N = lattice.circle_count(args.X, args.method, workers=args.threads)
    out = {"X": args.X, "method": args.method, "N": N}
    if args.X >= 4:
        out["report"] = lattice.circle_report(args.X).as_dict()
    return Output(out, name="lattice-circle")


def cmd_lattice_psi_check(args) -> Output:
    scan = lattice.psi_scan(args.xmin, args.xmax, args.step)
    if args.problem == "divisor":
        err, ps, res = scan.div_error, scan.div_psi, scan.div_residual
    else:
        err, ps, res = scan.circ_error, scan.circ_psi["displayed"], scan.circ_residual()
    rows = [["X", "error_term", "psi_side", "residual"]]
    rows += [[repr(float(x)), repr(float(e)), repr(float(p)), repr(float(r))] for x, e, p, r in zip(scan.X, err, ps, res)]
    cal = lattice.load_calibration()
    cap = cal["R_div"] if args.problem == "divisor" else cal["R_circ"]
    sup = float(abs(res).max())
    ok = sup <= cap if args.xmax <= cal["xmax"] else sup <= 1.10 * cap
    print(f"sup |residual| = {sup:.9f}, calibrated cap = {cap}", file=sys.stderr)
    return Output(rows, ok, "csv", f"psi-check-{args.problem}")


def cmd_lattice_rsum(args) -> Output:
    val = lattice.r_sum(args.M, args.T, args.a, args.b)
    out = {"M": args.M, "T": args.T, "a": args.a, "b": args.b, "R": val, "trivial_cap": (float(args.M) + 1) / 2}
    if isinstance(args.T, (int, Fraction)) and isinstance(args.M, (int, Fraction)):
        out["R_exact"] = lattice.r_sum_exact(args.M, args.T, args.a, args.b)
    return Output(out, abs(val) <= out["trivial_cap"], name="lattice-rsum")


def cmd_lattice_variants(args) -> Output:
    rep = lattice.circle_variant_report(args.xmax)
    return Output([{"variant": v.variant, "sup_half": v.sup_half, "sup_full": v.sup_full, "bounded": v.bounded}
                   for v in rep], name="lattice-variants")


def cmd_lattice_short(args) -> Output:
    levels = lattice.divisor_short_interval_count(args.T, args.M, args.levels)
    ok = all(l.count <= l.restricted_divisor_side <= l.divisor_side for l in levels)
    return Output([l.as_dict() for l in levels], ok, name="lattice-short")


def cmd_verify_all(args) -> Output:
    cfg = acceptance.VerifyConfig(grid_density=args.grid, remark_samples=args.samples, sum_jobs=args.jobs,
                                  random_reals=args.reals, seed=args.seed, threads=args.threads,
                                  theta=args.corrupt_theta or tables.THETA)
    results = acceptance.verify_all(cfg, lambda r: print(r.line(), file=sys.stderr, flush=True))
    ok = all(r.ok for r in results)
    return Output({"all_pass": ok, "checks": [r.as_dict() for r in results]}, ok, name="verify-all")


# --------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed for sampled checks")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads")
    common.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS, help="output format")
    common.add_argument("--output", type=Path, default=argparse.SUPPRESS,
                        help=f"output file (default: stdout, or ${OUTPUT_DIR_ENV}/<name>.<fmt> when set)")

    p = argparse.ArgumentParser(prog="expsums", parents=[common],
                                description="Exact exponent bookkeeping and numerical checks for exponential sums.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(parent, name, fn, help_):
        sp = parent.add_parser(name, help=help_, parents=[common], description=help_)
        sp.set_defaults(fn=fn)
        return sp

    sp = add(sub, "identities", cmd_identities, "check every rational identity exactly (CSV)")
    sp.add_argument("--theta", type=rational, default=tables.THETA, help=argparse.SUPPRESS)

    bp = sub.add_parser("bounds", help="log-domain bound expressions and derivation replays")
    bsub = bp.add_subparsers(dest="bounds_command", required=True, metavar="ACTION")
    sp = add(bsub, "eval", cmd_bounds_eval, "evaluate one bound exponent at (h, m)")
    sp.add_argument("--id", required=True, choices=bounds.BOUND_IDS)
    sp.add_argument("--nu", type=int)
    sp.add_argument("--h", type=rational, required=True)
    sp.add_argument("--m", type=rational, required=True)
    sp.add_argument("--logT", type=float, help="numeric log T for the log-power side conditions")
    add(bsub, "theta", cmd_bounds_theta, "solve the balance that fixes theta")
    sp = add(bsub, "replay7", cmd_bounds_replay7, "certify the divisor/circle exponent on a grid")
    sp.add_argument("--grid", type=int, default=64)
    add(bsub, "replay8", cmd_bounds_replay8, "replay the mean-square exponent chain")
    sp = add(bsub, "remark", cmd_bounds_remark, "sample the Y/X and Z/X exponent ratios")
    sp.add_argument("--nu", type=int, required=True)
    sp.add_argument("--samples", type=int, default=100)
    sp = add(bsub, "exppair", cmd_bounds_exppair, "apply A/B processes to an exponent pair")
    sp.add_argument("--word", required=True)
    sp.add_argument("--k", type=rational, default=Fraction(0))
    sp.add_argument("--l", type=rational, default=Fraction(1))

    sp = add(sub, "plan", cmd_plan, "choose and check the large-sieve parameters")
    sp.add_argument("--case", choices=("A", "B"), default="A")
    sp.add_argument("--H", type=number, required=True)
    sp.add_argument("--M", type=number, required=True)
    sp.add_argument("--T", type=number, required=True)
    sp.add_argument("--nu", type=int, default=3)
    sp.add_argument("--nstar", action="store_true", help="report the small-H fallback N*, R*, H* instead")
    for k in _CONST_KEYS:
        sp.add_argument(f"--{k}", type=number, default=None)

    sup = sub.add_parser("sum", help="evaluate exponential sums")
    ssub = sup.add_subparsers(dest="sum_command", required=True, metavar="KIND")
    sp = add(ssub, "s7", cmd_sum_s7, "S(H, M, T; a, b) with phase 4hT/(4m+a) + hb/4")
    for k in ("H", "M"):
        sp.add_argument(f"--{k}", type=float, required=True)
    sp.add_argument("--T", type=number, required=True)
    sp.add_argument("--a", type=int, default=0)
    sp.add_argument("--b", type=int, default=0)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--exact", dest="method", action="store_const", const="exact")
    g.add_argument("--float", dest="method", action="store_const", const="float")
    sp.set_defaults(method="auto")
    sp = add(ssub, "star", cmd_sum_star, "S* with phase T log((m+h)/(m-h))")
    for k in ("T", "H", "H1", "M", "M1"):
        sp.add_argument(f"--{k}", type=float, required=True)
    sp = add(ssub, "general", cmd_sum_general, "weighted S with phase (hT/M) F(m/M)")
    sp.add_argument("--phase", choices=("inverse_shift", "log"), default="inverse_shift")
    for k in ("H", "M"):
        sp.add_argument(f"--{k}", type=float, required=True)
    sp.add_argument("--T", type=number, required=True)
    sp.add_argument("--a", type=int, default=0)
    sp.add_argument("--b", type=int, default=0)
    sp.add_argument("--g", help="comma-separated samples of g on a uniform grid of [1, 2] (default 1/x)")
    sp.add_argument("--G", help="comma-separated samples of G on a uniform grid of [1, 2] (default 1)")
    sp = add(ssub, "fit", cmd_sum_fit, "least-squares growth exponent (report-only)")
    sp.add_argument("--input", help="CSV of T,|value| rows")
    sp.add_argument("--h", type=rational, default=Fraction(1, 10))
    sp.add_argument("--m", type=rational, default=Fraction(9, 20))
    sp.add_argument("--a", type=int, default=1)
    sp.add_argument("--b", type=int, default=0)
    sp.add_argument("--Ts", type=lambda s: [int(float(x)) for x in s.split(",")], default=[10**4, 10**5, 10**6])

    lp = sub.add_parser("lattice", help="divisor and circle problem computations")
    lsub = lp.add_subparsers(dest="lattice_command", required=True, metavar="ACTION")
    sp = add(lsub, "divisor", cmd_lattice_divisor, "exact D(X) and the sawtooth report")
    sp.add_argument("--X", type=number, required=True)
    sp.add_argument("--method", choices=("hyperbola", "sieve"), default="hyperbola")
    sp = add(lsub, "circle", cmd_lattice_circle, "exact N(X) and the sawtooth report")
    sp.add_argument("--X", type=number, required=True)
    sp.add_argument("--method", choices=("brute", "gauss"), default="brute")
    sp = add(lsub, "psi-check", cmd_lattice_psi_check, "residual scan over an X-grid (CSV)")
    sp.add_argument("--problem", choices=("divisor", "circle"), default="divisor")
    sp.add_argument("--xmin", type=number, default=4)
    sp.add_argument("--xmax", type=number, default=100_000)
    sp.add_argument("--step", type=number, default=1)
    sp = add(lsub, "rsum", cmd_lattice_rsum, "R(M, T; a, b) with exact sawtooth arguments")
    sp.add_argument("--M", type=number, required=True)
    sp.add_argument("--T", type=number, required=True)
    sp.add_argument("--a", type=int, default=0)
    sp.add_argument("--b", type=int, default=0)
    sp = add(lsub, "variants", cmd_lattice_variants, "which sign permutations of the circle formula stay bounded")
    sp.add_argument("--xmax", type=int, default=100_000)
    sp = add(lsub, "short", cmd_lattice_short, "short-interval divisor counts per level Delta = 2^-j")
    sp.add_argument("--T", type=number, required=True)
    sp.add_argument("--M", type=number, required=True)
    sp.add_argument("--levels", type=lambda s: [int(x) for x in s.split(",")], default=[1, 2, 3, 4])

    sp = add(sub, "verify-all", cmd_verify_all, "run the eleven acceptance checks")
    sp.add_argument("--grid", type=int, default=64)
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--jobs", type=int, default=1000)
    sp.add_argument("--reals", type=int, default=1000)
    sp.add_argument("--corrupt-theta", type=rational, default=None, help=argparse.SUPPRESS)
    return p


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 0 for --help and 2 for usage errors
        return int(exc.code or 0)
    for k, v in (("seed", 0), ("threads", 1), ("format", None), ("output", None)):
        if not hasattr(args, k):
            setattr(args, k, v)
    try:
        out = args.fn(args)
    except (ValueError, ArithmeticError, TypeError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    text = render(out, args.format)
    dest = args.output
    if dest is None and os.environ.get(OUTPUT_DIR_ENV):
        ext = args.format or out.default_format
        dest = Path(os.environ[OUTPUT_DIR_ENV]) / f"{out.name}.{ext}"
    if dest is None:
        sys.stdout.write(text)
    else:
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(text)
        print(f"wrote {dest}", file=sys.stderr)
    if not out.ok:
        print(f"check failed: {out.name}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
