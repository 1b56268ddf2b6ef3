"""Command-line interface.

Output conventions: integers in decimal, exact rationals as "p/q", floats
with 15 significant digits.  Commands that run checks exit 0 iff every check
passed; `--out report.json` writes the machine-readable report.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import harness
from .enumeration import (
    log_phi,
    phi_closed,
    phi_recurrence,
    quad_count,
    theta_of_q,
    z_closed,
    z_series,
)
from .errors import DomainError
from .peeling_law import law_from_alpha, p_i, total_mass_partial
from .planar_map import dump_json, load_json, to_svg, validate
from .sampler import (
    NonSimpleParams,
    boltzmann_polygon,
    build_ball,
    core,
    expand_nonsimple,
    uniform_polygon,
)


def fmt(x):
    if isinstance(x, bool):
        return str(x)
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return "%d/%d" % (x.numerator, x.denominator)
    if isinstance(x, float):
        return "%.15g" % x
    return str(x)


def _parse_number(text):
    """int, 'p/q' Fraction, or float."""
    try:
        return int(text)
    except ValueError:
        pass
    if "/" in text:
        return Fraction(text)
    return float(text)


def _emit_report(report, out=None, csv_out=None):
    for c in report.checks:
        print(
            "%-45s observed=%s expected=%s tol=%s %s"
            % (c.name, fmt(c.observed), fmt(c.expected), fmt(c.tol),
               "PASS" if c.passed else "FAIL")
        )
    print("overall: %s" % ("PASS" if report.passed else "FAIL"))
    if out:
        harness.export(report, "json", out)
    if csv_out:
        harness.export(report, "csv", csv_out)
    return 0 if report.passed else 1


# -- enum -------------------------------------------------------------------


def cmd_enum_phi(args):
    if args.mode == "closed":
        print(fmt(phi_closed(args.n, args.m)))
    elif args.mode == "recurrence":
        print(fmt(phi_recurrence(args.n, args.m)))
    else:
        print(fmt(log_phi(args.n, args.m)))
    return 0


def cmd_enum_z(args):
    q = _parse_number(args.q)
    if args.cutoff is not None:
        lower, tail = z_series(args.m, Fraction(q), args.cutoff)
        print("lower=%s tail_bound=%s" % (fmt(lower), fmt(tail)))
        return 0
    theta = 0 if q == 0 else theta_of_q(q)
    if isinstance(q, Fraction) and q == Fraction(2, 27):
        theta = Fraction(1, 6)
    print(fmt(z_closed(args.m, theta)))
    return 0


def cmd_enum_quad(args):
    print(fmt(quad_count(args.m, args.n)))
    return 0


# -- law --------------------------------------------------------------------


def cmd_law_table(args):
    alpha = _parse_number(args.alpha)
    law = law_from_alpha(alpha)
    print("alpha=%s beta=%s q=%s phase=%s"
          % (fmt(law.alpha), fmt(law.beta), fmt(law.q), law.phase))
    for i in range(1, args.imax + 1):
        print("p_%d=%s" % (i, fmt(p_i(law, i))))
    print("partial_mass=%s" % fmt(total_mass_partial(law, args.imax)))
    return 0


def cmd_law_check(args):
    alpha = _parse_number(args.alpha)
    report = harness.verify_law(alphas=(Fraction(alpha),))
    return _emit_report(report, args.out)


# -- sample -----------------------------------------------------------------


def _describe_map(mp):
    v, e, f = mp.counts()
    print("vertices=%d edges=%d internal_faces=%d" % (v, e, f))


def cmd_sample_ball(args):
    mp = build_ball(
        _parse_number(args.alpha),
        args.r,
        args.seed,
        schedule=args.schedule,
        max_jump=args.max_jump,
        max_patch=args.max_patch,
    )
    _describe_map(mp)
    rep = validate(mp)
    print("valid=%s" % rep.ok)
    if args.out:
        dump_json(mp, args.out)
    if args.svg:
        with open(args.svg, "w") as fh:
            fh.write(to_svg(mp))
    return 0 if rep.ok else 1


def cmd_sample_polygon(args):
    if (args.n is None) == (args.boltzmann is None):
        raise DomainError("give exactly one of --n and --boltzmann")
    if args.n is not None:
        fm = uniform_polygon(args.m, args.n, args.seed)
    else:
        fm = boltzmann_polygon(args.m, _parse_number(args.boltzmann), args.seed)
    print("m=%d n=%d" % (fm.m, fm.n))
    _describe_map(fm)
    if args.out:
        dump_json(fm, args.out)
    if args.svg:
        with open(args.svg, "w") as fh:
            fh.write(to_svg(fm))
    return 0


def cmd_sample_expand(args):
    fm = load_json(args.infile)
    params = NonSimpleParams(q_geo=args.q_geo, gamma=args.gamma)
    out = expand_nonsimple(fm, params, args.seed)
    print("m=%d n=%d" % (out.m, out.n))
    _describe_map(out)
    if args.out:
        dump_json(out, args.out)
    return 0


def cmd_sample_core(args):
    gm = load_json(args.infile)
    out = core(gm)
    print("m=%d n=%d" % (out.m, out.n))
    _describe_map(out)
    if args.out:
        dump_json(out, args.out)
    return 0


# -- verify / experiment ----------------------------------------------------


def cmd_verify(args):
    if args.suite == "enum":
        report = harness.verify_enumeration()
    elif args.suite == "law":
        report = harness.verify_law()
    elif args.suite == "order":
        report = harness.order_invariance_experiment(
            _parse_number(args.alpha), args.trials, args.seed
        )
    else:
        report = harness.quad_constants_report()
    return _emit_report(report, args.out, args.csv)


def cmd_experiment_finite_limit(args):
    report = harness.finite_limit_experiment(
        args.m, args.n, args.trials, args.seed, full_maps=args.full_maps
    )
    return _emit_report(report, args.out, args.csv)


def cmd_export(args):
    mp = load_json(args.infile)
    harness.export(mp, args.format, args.outfile)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="hptri")
    sub = ap.add_subparsers(dest="command", required=True)

    enum = sub.add_parser("enum", help="exact / log-scale counts")
    esub = enum.add_subparsers(dest="what", required=True)
    p = esub.add_parser("phi")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--mode", choices=("closed", "recurrence", "log"),
                   default="closed")
    p.set_defaults(fn=cmd_enum_phi)
    p = esub.add_parser("z")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--cutoff", type=int, default=None,
                   help="series mode: print (lower, tail bound)")
    p.set_defaults(fn=cmd_enum_z)
    p = esub.add_parser("quad")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(fn=cmd_enum_quad)

    law = sub.add_parser("law", help="single-step peeling law")
    lsub = law.add_subparsers(dest="what", required=True)
    p = lsub.add_parser("table")
    p.add_argument("--alpha", required=True)
    p.add_argument("--imax", type=int, default=10)
    p.set_defaults(fn=cmd_law_table)
    p = lsub.add_parser("check")
    p.add_argument("--alpha", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_law_check)

    samp = sub.add_parser("sample", help="map samplers")
    ssub = samp.add_subparsers(dest="what", required=True)
    p = ssub.add_parser("ball")
    p.add_argument("--alpha", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--schedule", default="leftmost_near_root")
    p.add_argument("--max-jump", type=int, default=None)
    p.add_argument("--max-patch", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--svg", default=None)
    p.set_defaults(fn=cmd_sample_ball)
    p = ssub.add_parser("polygon")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--boltzmann", default=None)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--svg", default=None)
    p.set_defaults(fn=cmd_sample_polygon)
    p = ssub.add_parser("expand")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--q-geo", type=float, required=True)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_sample_expand)
    p = ssub.add_parser("core")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_sample_core)

    ver = sub.add_parser("verify", help="verification suites")
    ver.add_argument("suite", choices=("enum", "law", "order", "quad"))
    ver.add_argument("--alpha", default="2/3")
    ver.add_argument("--trials", type=int, default=10 ** 4)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--out", default=None)
    ver.add_argument("--csv", default=None)
    ver.set_defaults(fn=cmd_verify)

    exp = sub.add_parser("experiment", help="statistical experiments")
    xsub = exp.add_subparsers(dest="what", required=True)
    p = xsub.add_parser("finite-limit")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--full-maps", action="store_true")
    p.add_argument("--out", default=None)
    p.add_argument("--csv", default=None)
    p.set_defaults(fn=cmd_experiment_finite_limit)

    exq = sub.add_parser("export", help="re-export a stored map")
    exq.add_argument("--in", dest="infile", required=True)
    exq.add_argument("--format", choices=("json", "svg"), required=True)
    exq.add_argument("--outfile", required=True)
    exq.set_defaults(fn=cmd_export)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except DomainError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
