"""Command-line interface.

Exit codes: 0 success, 1 usage or I/O error, 2 some result inconclusive,
3 theorem violation or rejected certificate.
"""
from __future__ import annotations

import argparse
import json
import sys

from .counting import boundary_intervals, equivalence_classes, verify_orbit_bound
from .errors import PWCError, TheoremViolation
from .ifs import (
    clamp_construction,
    escape_steps,
    highly_contractive_check,
    ifs_from_json,
    radius_holds,
    real_line_radius,
    trim_real_line,
)
from .maps import ModOneFamily, family_from_json, map_from_json, map_to_json, reduce_mod_one
from .orbits import Inconclusive, iterate_with_itinerary, omega_limit
from .partition import (
    backward_closure,
    build_quasi_partition,
    certificate,
    extract_periodic_orbits,
    verify_certificate,
)
from .scalar import fmt, to_scalar
from .sweep import (
    Budgets,
    Classification,
    dump_json,
    estimate_exceptional,
    grid,
    sweep_classify,
    write_bifurcation,
    write_certificates,
    write_csv,
)

OK, USAGE, INCONCLUSIVE, VIOLATION = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE, f"{self.prog}: error: {message}\n")


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _emit(doc):
    dump_json(doc, sys.stdout)


def cmd_eval(args) -> int:
    pc = map_from_json(_load_json(args.map))
    x = to_scalar(args.x)
    value, branch = pc.eval(x)
    _emit({"x": fmt(x), "value": fmt(value), "branch": branch})
    return OK


def cmd_orbit(args) -> int:
    pc = map_from_json(_load_json(args.map))
    trace = iterate_with_itinerary(pc, to_scalar(args.x), args.steps, exact=not args.float)
    budget = Budgets.from_env(Budgets(orbit_steps=args.budget)).orbit_steps
    lim = omega_limit(pc, to_scalar(args.x), budget)
    doc = {"trace": trace.to_json()}
    if isinstance(lim, Inconclusive):
        doc["omega_limit"] = {"inconclusive": lim.reason, "steps": lim.steps}
        _emit(doc)
        return INCONCLUSIVE
    doc["omega_limit"] = lim.to_json()
    _emit(doc)
    return OK


def cmd_partition(args) -> int:
    pc = map_from_json(_load_json(args.map))
    if pc.is_real_line:
        pc = trim_real_line(pc)
    budgets = Budgets.from_env(Budgets(max_points=args.max_points, max_depth=args.max_depth))
    closure = backward_closure(pc, budgets.max_points, budgets.max_depth)
    summary = {"finite": closure.finite, "depth_reached": closure.depth_reached, "num_Q": len(closure.points)}
    if not closure.finite:
        _emit(summary)
        return INCONCLUSIVE
    qp = build_quasi_partition(pc, closure)
    orbits = extract_periodic_orbits(pc, qp)
    classes = equivalence_classes(qp, boundary_intervals(qp, pc.breakpoints))
    report = verify_orbit_bound(pc, orbits, classes, closure=closure)
    cert = certificate(pc, qp, orbits, {"bound": report.to_json()})
    summary.update(m=qp.m, num_orbits=len(orbits), class_count=classes.count,
                   periods=[o.period for o in orbits], orbits=cert["orbits"])
    if args.cert:
        with open(args.cert, "w", newline="\n") as fh:
            dump_json(cert, fh)
    _emit(summary)
    return OK


def cmd_sweep(args) -> int:
    base = family_from_json(_load_json(args.family)).base
    budgets = Budgets.from_env()
    deltas = grid(args.start, args.stop, args.steps)
    records = sweep_classify(base, deltas, budgets, workers=args.workers, certificates=bool(args.certs))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            write_csv(records, fh)
    else:
        write_csv(records, sys.stdout)
    if args.plot:
        with open(args.plot, "w", newline="") as fh:
            write_bifurcation(records, fh)
    if args.certs:
        write_certificates(records, args.certs)
    print(f"exceptional fraction: {fmt(estimate_exceptional(records))}", file=sys.stderr)
    suspect = any(r.classification is Classification.EXCEPTIONAL_SUSPECT for r in records)
    return INCONCLUSIVE if suspect else OK


def cmd_verify(args) -> int:
    cert = _load_json(args.cert)
    doc = _load_json(args.map)
    if "family" in cert:
        pc = map_from_json(doc, validate_images=False)
        if map_to_json(pc) != cert.get("map"):
            pc = reduce_mod_one(ModOneFamily(pc, to_scalar(cert["family"]["delta"])))
        else:
            pc = map_from_json(doc)
    else:
        pc = map_from_json(doc)
    problems = verify_certificate(cert, pc)
    for p in problems:
        print(p, file=sys.stderr)
    print("certificate OK" if not problems else f"certificate REJECTED ({len(problems)} problems)")
    return OK if not problems else VIOLATION


def cmd_ifs_check(args) -> int:
    ifs = ifs_from_json(_load_json(args.ifs))
    ok, rho = highly_contractive_check(ifs)
    doc = {"highly_contractive": ok, "rho": fmt(rho)}
    if args.clamp:
        xs = [to_scalar(x) for x in args.clamp.split(",")]
        res = clamp_construction(ifs, xs)
        c_ok, c_rho = highly_contractive_check(res.ifs)
        doc["clamp"] = {
            "margin": fmt(res.margin),
            "neighborhood": [[fmt(a), fmt(b)] for a, b in res.neighborhood],
            "highly_contractive": c_ok,
            "rho": fmt(c_rho),
        }
    if args.radius:
        r0 = real_line_radius(ifs)
        doc["radius"] = {"r0": fmt(r0), "holds_at_r0": bool(r0 > 0 and radius_holds(ifs, r0))}
        if args.escape is not None:
            rho = max(b.lipschitz for b in ifs.branches)
            r = r0 if r0 > 0 else to_scalar(1)
            doc["radius"]["escape_steps"] = escape_steps(to_scalar(args.escape), rho, r)
    _emit(doc)
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pwc", description="Dynamics of piecewise affine contractions.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("eval", help="evaluate a map at a point")
    s.add_argument("map")
    s.add_argument("x")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("orbit", help="forward orbit, itinerary and omega-limit")
    s.add_argument("map")
    s.add_argument("x")
    s.add_argument("--steps", type=int, default=20)
    s.add_argument("--budget", type=int, default=Budgets().orbit_steps)
    s.add_argument("--float", action="store_true", help="record the trace in floating point")
    s.set_defaults(func=cmd_orbit)

    s = sub.add_parser("partition", help="invariant quasi-partition and periodic orbits")
    s.add_argument("map")
    s.add_argument("--cert")
    s.add_argument("--max-points", type=int, default=Budgets().max_points)
    s.add_argument("--max-depth", type=int, default=Budgets().max_depth)
    s.set_defaults(func=cmd_partition)

    s = sub.add_parser("sweep", help="classify a grid of shifts of the mod-1 family")
    s.add_argument("family")
    s.add_argument("--from", dest="start", required=True)
    s.add_argument("--to", dest="stop", required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--csv")
    s.add_argument("--plot", help="write bifurcation data (delta, periodic point) as CSV")
    s.add_argument("--certs", help="directory for per-shift JSON certificates")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("verify", help="re-check a certificate against a map")
    s.add_argument("cert")
    s.add_argument("map")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("ifs-check", help="contraction, clamping and radius checks for an IFS")
    s.add_argument("ifs")
    s.add_argument("--clamp", help="comma-separated breakpoints")
    s.add_argument("--radius", action="store_true")
    s.add_argument("--escape", help="seed point for the escape-time helper (with --radius)")
    s.set_defaults(func=cmd_ifs_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TheoremViolation as exc:
        print(f"theorem violation: {exc}", file=sys.stderr)
        return VIOLATION
    except (PWCError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
