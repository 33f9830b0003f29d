"""Command-line entry point: ``cubiccount <subcommand> ...``.

Exit codes: 0 success, 1 domain error (singular curve, bad prime, malformed
input), 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import bounds as bd
from .arith import primes_up_to
from .curve import (
    BadReductionError,
    CurveError,
    SingularCertified,
    SmoothCertified,
    Undetermined,
    count_points_fp,
    enumerate_rational_points,
    normalize_point,
    reduction_profile,
    smoothness_verdict,
)
from .descent import build_x_points, estimate_height_exponent, partition_classes
from .detmethod import BasisDeficiencyError, ExperimentConfig, NonvanishingError, run_experiment
from .fileio import CurveFileError, load_curve, load_fixture, pairs_to_csv, points_to_csv
from .group import GroupContext, GroupLawError, add, check_divisor_relation, negate, scalar_mul


class DomainError(Exception):
    pass


def _point(text: str):
    t = text.strip().strip("[]()")
    sep = ":" if ":" in t else ","
    try:
        return normalize_point([int(c) for c in t.split(sep)])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad point {text!r}: {exc}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(c) for c in text.split(",") if c.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


def _int_range(text: str) -> list[int]:
    """'1:8' (inclusive) or a comma list."""
    if ":" in text:
        lo, hi = text.split(":")
        return list(range(int(lo), int(hi) + 1))
    return _int_list(text)


def _emit(obj, fmt: str = "json"):
    if fmt == "json":
        print(json.dumps(obj, indent=2, default=str))
        return
    rows = obj if isinstance(obj, list) else [obj]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (str(v) if isinstance(v, (Fraction, list, tuple)) else v) for k, v in r.items()})
    sys.stdout.write(buf.getvalue())


def _curve(args):
    """A curve file path, or the name of a bundled fixture."""
    src = args.curve
    if Path(src).exists():
        return load_curve(src)
    try:
        return load_fixture(Path(src).stem)
    except CurveFileError:
        return load_fixture(Path(src).stem, negative=True)


def _smooth_curve(args):
    rec = _curve(args)
    v = smoothness_verdict(rec.form)
    if isinstance(v, SingularCertified):
        raise DomainError(f"curve is singular: {v}")
    if isinstance(v, Undetermined) and not getattr(args, "force", False):
        raise DomainError(f"smoothness undetermined ({v}); pass --force to continue")
    return rec


def _origin(args, rec):
    O = args.origin or rec.base_point
    if O is None:
        raise DomainError("no base point: give --origin or add base_point to the curve file")
    return O


# -- subcommands --------------------------------------------------------------


def cmd_check(args):
    rec = _curve(args)
    v = smoothness_verdict(rec.form)
    print(v)
    return 0 if isinstance(v, SmoothCertified) else 1


def cmd_points(args):
    rec = _smooth_curve(args)
    pts = enumerate_rational_points(rec.form, args.B)
    text = points_to_csv(pts)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"N={len(pts)}")
    return 0


def cmd_fp_count(args):
    rec = _smooth_curve(args)
    ps = args.p if args.p else primes_up_to(args.up_to)
    rows = []
    for p in ps:
        try:
            n = count_points_fp(rec.form, p)
        except BadReductionError:
            rows.append({"p": p, "n_p": "bad", "hasse_ok": ""})
            continue
        rows.append({"p": p, "n_p": n, "hasse_ok": (n - p - 1) ** 2 <= 4 * p})
    _emit(rows, "csv")
    return 0


def cmd_badprimes(args):
    rec = _smooth_curve(args)
    prof = reduction_profile(rec.form, args.bound)
    _emit(
        {
            "prime_bound": prof.prime_bound,
            "bad_primes": list(prof.bad_primes),
            "radical": prof.conductor_radical,
            "log_radical": prof.log_radical,
        },
        args.format,
    )
    return 0


def cmd_group(args):
    rec = _smooth_curve(args)
    F = rec.form
    O = _origin(args, rec)
    ctx = GroupContext(F, O, args.p)

    def pt(P):
        if P is None:
            raise DomainError("missing point argument")
        return ctx.point(P.coords)

    if args.op == "add":
        out = add(ctx, pt(args.P), pt(args.Q))
    elif args.op == "neg":
        out = negate(ctx, pt(args.P))
    elif args.op == "mul":
        out = scalar_mul(ctx, args.m, pt(args.P))
    else:
        ok = check_divisor_relation(F, args.m, pt(args.P), pt(args.Q), pt(args.R), O)
        print("holds" if ok else "fails")
        return 0
    print(out)
    return 0


def cmd_classes(args):
    rec = _smooth_curve(args)
    F = rec.form
    O = _origin(args, rec)
    pts = enumerate_rational_points(F, args.B)
    part = partition_classes(pts, args.m, GroupContext(F, O), pts)
    out = {
        "m": args.m,
        "B": args.B,
        "points": len(pts),
        "classes": [[str(P) for P in c] for c in part.classes],
        "count": len(part),
        "method": part.method,
    }
    if rec.rank is not None:
        out["rank"] = {"value": rec.rank, "source": bd.RANK_PROVENANCE}
        out["within_16_m_r"] = part.within_bound(rec.rank)
    _emit(out)
    return 0


def cmd_xpoints(args):
    rec = _smooth_curve(args)
    F = rec.form
    O = _origin(args, rec)
    R = args.R or O
    ctx = GroupContext(F, O)
    if args.generator is not None:
        G = ctx.point(args.generator.coords)
        seeds = [scalar_mul(ctx, k, G) for k in args.multiples]
    else:
        seeds = enumerate_rational_points(F, args.B)
    pairs = build_x_points(F, ctx.point(R.coords), args.m, seeds, args.cap)
    sys.stdout.write(pairs_to_csv(pairs, F))
    if pairs:
        est = estimate_height_exponent(pairs)
        print(f"# pairs={len(pairs)} height_exponent={est.estimate:.6f} A={est.ceiling()}")
    return 0


def cmd_detmethod(args):
    rec = _smooth_curve(args)
    R = args.R or rec.base_point
    cfg = ExperimentConfig(
        A=args.A, u=args.u, prime_limit=args.prime_limit, q=args.q, a=args.a, b=args.b, seed=args.seed,
        all_minors=args.all_minors,
    )
    report = run_experiment(rec.form, R, args.m, args.B, cfg)
    d = report.to_dict()
    if rec.rank is not None:
        d["rank_r"] = {"value": rec.rank, "source": bd.RANK_PROVENANCE}
    text = json.dumps(d, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
        aux = d["auxiliary_form"]
        print(f"s={d['s']} pairs={d['pairs']} rank={d['rank']} form={'found' if aux else 'absent'}")
    else:
        print(text)
    return 1 if d["errors"] else 0


def cmd_bounds(args):
    k = args.kind
    if k == "uniform-bound":
        inp = bd.BoundInputs(args.B, args.r, args.m)
        out = {"B": args.B, "r": args.r, "m": args.m, "value": bd.uniform_bound(inp), "rank_source": bd.RANK_PROVENANCE}
    elif k == "optimal-m":
        out = {"B": args.B, "m": bd.optimal_m(args.B)}
    elif k == "params":
        pc = bd.parameter_choice(args.B, args.m, Fraction(args.A), Fraction(args.u))
        out = {"B": args.B, "m": args.m, "A": args.A, "u": args.u, "a": pc.a, "b": pc.b, "s": pc.s,
               "size_lhs": pc.size_lhs, "size_rhs": pc.size_rhs, "size_holds": pc.size_holds}
    elif k == "mertens":
        r = bd.mertens_diagnostics(args.s)
        out = r.__dict__.copy()
    elif k == "divisor-sum":
        if args.exhaustive:
            n, bad = bd.divisor_sum_exhaustive(args.exhaustive)
            out = {"limit": args.exhaustive, "checked": n, "first_failure": bad}
        else:
            lhs, rhs, ok = bd.divisor_sum_check(args.Pi)
            out = {"Pi": args.Pi, "lhs": lhs, "rhs": rhs, "holds": ok}
    elif k == "rank-exponent":
        r = bd.rank_exponent(args.r)
        if args.format == "csv":
            _emit([{"l": l + 1, "m_l": v, "partial_sum": s} for l, (v, s) in enumerate(zip(r.m_values, r.partial_sums))], "csv")
            return 0
        out = {"r": r.r, "exponent": str(r.exponent), "m": [str(v) for v in r.m_values],
               "partial_sums": [str(v) for v in r.partial_sums], "at_most_1_plus_r_over_2": r.within_one_plus_half_r}
    else:
        rec = _smooth_curve(args)
        N = args.N if args.N is not None else len(enumerate_rational_points(rec.form, args.B))
        out = bd.reduction_diagnostics(rec.form, args.B, N, args.prime_bound).__dict__.copy()
        out["bad_primes"] = list(out["bad_primes"])
    _emit(out, args.format)
    return 0


def cmd_growth(args):
    rec = _smooth_curve(args)
    if rec.rank is None and args.r is None:
        raise DomainError("rank unknown: give --r or add rank to the curve file")
    r = args.r if args.r is not None else rec.rank
    rows = []
    for B in args.B_grid:
        N = len(enumerate_rational_points(rec.form, B))
        m = bd.optimal_m(B)
        rows.append({"B": B, "N(B)": N, "uniform_bound": bd.uniform_bound(bd.BoundInputs(B, r, m)),
                     "logB_power": math.log(B) ** (2 + r / 2)})
    _emit(rows, "csv")
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cubiccount", description="Rational points on plane cubics.")
    sub = ap.add_subparsers(dest="command", required=True)

    def curve_cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--curve", required=True, help="curve JSON file or fixture name")
        p.add_argument("--force", action="store_true", help="continue when smoothness is undetermined")
        p.add_argument("--seed", type=int, default=0)
        return p

    curve_cmd("check", "smoothness verdict").set_defaults(func=cmd_check)

    p = curve_cmd("points", "rational points of height <= B")
    p.add_argument("--B", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_points)

    p = curve_cmd("fp-count", "point counts over F_p")
    p.add_argument("--p", type=_int_list)
    p.add_argument("--up-to", type=int, default=50)
    p.set_defaults(func=cmd_fp_count)

    p = curve_cmd("badprimes", "primes of bad reduction up to a bound")
    p.add_argument("--bound", type=int, default=10_000)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_badprimes)

    p = curve_cmd("group", "group law")
    p.add_argument("op", choices=["add", "neg", "mul", "relation"])
    p.add_argument("--origin", type=_point)
    p.add_argument("--P", type=_point)
    p.add_argument("--Q", type=_point)
    p.add_argument("--R", type=_point)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--p", type=int, help="work over F_p")
    p.set_defaults(func=cmd_group)

    p = curve_cmd("classes", "m-descent classes of points of height <= B")
    p.add_argument("--B", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--origin", type=_point)
    p.set_defaults(func=cmd_classes)

    p = curve_cmd("xpoints", "pairs (P, Q) with [P] = m[Q] - (m-1)[R]")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--origin", type=_point)
    p.add_argument("--R", type=_point)
    p.add_argument("--generator", type=_point)
    p.add_argument("--multiples", type=_int_range, default=list(range(1, 9)))
    p.add_argument("--B", type=int, default=100, help="seed with points of height <= B when no generator")
    p.add_argument("--cap", type=int)
    p.set_defaults(func=cmd_xpoints)

    p = curve_cmd("detmethod", "determinant method pipeline")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--B", type=int, required=True)
    p.add_argument("--R", type=_point)
    p.add_argument("--A", type=float)
    p.add_argument("--u", type=float, default=1)
    p.add_argument("--q", type=int)
    p.add_argument("--a", type=int)
    p.add_argument("--b", type=int)
    p.add_argument("--prime-limit", type=int)
    p.add_argument("--all-minors", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_detmethod)

    p = sub.add_parser("bounds", help="bound formulas and prime-sum diagnostics")
    p.add_argument("kind", choices=["uniform-bound", "optimal-m", "params", "mertens", "divisor-sum", "rank-exponent", "diagnostics"])
    p.add_argument("--B", type=int, default=1000)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--A", type=Fraction, default=Fraction(1))
    p.add_argument("--u", type=Fraction, default=Fraction(1))
    p.add_argument("--s", type=int, default=10)
    p.add_argument("--Pi", type=int, default=2)
    p.add_argument("--exhaustive", type=int)
    p.add_argument("--curve")
    p.add_argument("--N", type=int)
    p.add_argument("--prime-bound", type=int, default=10_000)
    p.add_argument("--force", action="store_true")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_bounds)

    p = curve_cmd("growth", "N(B) against the bound over a grid of B")
    p.add_argument("--B-grid", type=_int_list, required=True)
    p.add_argument("--r", type=int)
    p.set_defaults(func=cmd_growth)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "bounds" and args.kind == "diagnostics" and not args.curve:
        print("error: bounds diagnostics needs --curve", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (DomainError, CurveError, GroupLawError, BasisDeficiencyError, NonvanishingError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
