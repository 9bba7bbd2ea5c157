"""Shift sweeps of the mod-1 family and their output formats."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import partial
from pathlib import Path

from .counting import boundary_intervals, equivalence_classes, verify_orbit_bound
from .errors import NonGenericError
from .maps import ModOneFamily, PiecewiseContraction, bad_delta_check, reduce_mod_one
from .partition import backward_closure, build_quasi_partition, certificate, extract_periodic_orbits
from .scalar import fmt, to_scalar

BUDGET_ENV = "PWC_BUDGET_SCALE"
CSV_COLUMNS = ("delta", "m", "classification", "num_orbits", "periods", "work")


class Classification(str, Enum):
    PERIODIC = "PERIODIC"
    EXCEPTIONAL_SUSPECT = "EXCEPTIONAL_SUSPECT"
    BAD_SET_F = "BAD_SET_F"


@dataclass(frozen=True)
class Budgets:
    orbit_steps: int = 100_000
    max_points: int = 100_000
    max_depth: int = 10_000

    def scaled(self, factor) -> "Budgets":
        factor = to_scalar(factor)
        if factor <= 0:
            raise ValueError("budget scale must be positive")
        return Budgets(*(max(1, math.ceil(v * factor)) for v in (self.orbit_steps, self.max_points, self.max_depth)))

    @classmethod
    def from_env(cls, base: "Budgets | None" = None) -> "Budgets":
        base = base or cls()
        raw = os.environ.get(BUDGET_ENV)
        return base.scaled(raw) if raw else base


@dataclass(frozen=True)
class SweepRecord:
    delta: Fraction
    in_bad_set_F: bool
    m: int | None
    finite_Q: bool
    num_orbits: int
    periods: tuple
    classification: Classification
    work: tuple = ()
    class_count: int | None = None
    note: str = ""
    orbits: tuple = field(default=(), compare=False, repr=False)
    certificate: dict | None = field(default=None, compare=False, repr=False)

    def work_string(self) -> str:
        return ";".join(f"{k}={v}" for k, v in self.work)


def classify_delta(base: PiecewiseContraction, delta, budgets: Budgets | None = None, *, certificates: bool = False):
    """Run reduction, closure, quasi-partition, orbit extraction and the orbit bound for one shift."""
    budgets = budgets or Budgets()
    delta = to_scalar(delta)
    family = ModOneFamily(base, delta)
    if bad_delta_check(family):
        return SweepRecord(delta, True, None, False, 0, (), Classification.BAD_SET_F)
    pc = reduce_mod_one(family)
    closure = backward_closure(pc, budgets.max_points, budgets.max_depth)
    work = (("closure_depth", closure.depth_reached), ("preimage_evals", closure.work))
    if not closure.finite:
        return SweepRecord(delta, False, pc.n, False, 0, (), Classification.EXCEPTIONAL_SUSPECT, work,
                           note="closure budget exhausted")
    qp = build_quasi_partition(pc, closure)
    try:
        orbits = extract_periodic_orbits(pc, qp)
    except NonGenericError as exc:
        return SweepRecord(delta, False, pc.n, True, 0, (), Classification.EXCEPTIONAL_SUSPECT, work, note=str(exc))
    table = boundary_intervals(qp, pc.breakpoints)
    classes = equivalence_classes(qp, table)
    report = verify_orbit_bound(pc, orbits, classes, mod_one=True, n_base=base.n, closure=closure)
    cert = None
    if certificates:
        cert = certificate(pc, qp, orbits, {
            "family": {"delta": fmt(delta), "n_base": base.n},
            "bound": report.to_json(),
        })
    return SweepRecord(
        delta, False, pc.n, True, len(orbits), tuple(sorted(o.period for o in orbits)),
        Classification.PERIODIC, work, classes.count,
        "" if report.hypotheses_met else "backward orbits of breakpoints intersect",
        tuple(orbits), cert,
    )


def grid(a, b, steps: int) -> list:
    """``a + j (b - a) / steps`` for ``j = 0..steps``."""
    a, b = to_scalar(a), to_scalar(b)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    return [a + j * (b - a) / steps for j in range(steps + 1)]


def sweep_classify(base: PiecewiseContraction, deltas, budgets: Budgets | None = None, *,
                   workers: int = 1, certificates: bool = False) -> list:
    """Classify every shift; the result is sorted by shift regardless of scheduling."""
    deltas = [to_scalar(d) for d in deltas]
    if not deltas:
        raise ValueError("empty shift grid")
    job = partial(classify_delta, base, budgets=budgets, certificates=certificates)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(job, deltas, chunksize=max(1, len(deltas) // (4 * workers))))
    else:
        records = [job(d) for d in deltas]
    return sorted(records, key=lambda r: r.delta)


def estimate_exceptional(records) -> Fraction:
    """Fraction of suspected exceptional shifts among those outside the bad set."""
    eligible = [r for r in records if r.classification is not Classification.BAD_SET_F]
    if not eligible:
        return Fraction(0)
    bad = sum(r.classification is Classification.EXCEPTIONAL_SUSPECT for r in eligible)
    return Fraction(bad, len(eligible))


# --- output ------------------------------------------------------------------


def write_csv(records, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in sorted(records, key=lambda r: r.delta):
        w.writerow([
            fmt(r.delta), "" if r.m is None else r.m, r.classification.value, r.num_orbits,
            ";".join(map(str, r.periods)), r.work_string(),
        ])


def records_to_csv(records) -> str:
    buf = io.StringIO()
    write_csv(records, buf)
    return buf.getvalue()


def bifurcation_rows(records) -> list:
    """``(delta, delta_float, point, point_float)`` for every periodic point of every record."""
    rows = []
    for r in sorted(records, key=lambda r: r.delta):
        for orb in r.orbits:
            for p in orb.points:
                rows.append((fmt(r.delta), repr(float(r.delta)), fmt(p), repr(float(p))))
    return rows


def write_bifurcation(records, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(("delta", "delta_float", "point", "point_float"))
    w.writerows(bifurcation_rows(records))


def dump_json(doc, fh) -> None:
    json.dump(doc, fh, indent=2, sort_keys=True)
    fh.write("\n")


def certificate_name(delta: Fraction) -> str:
    return f"delta_{'m' if delta < 0 else ''}{abs(delta.numerator)}_{delta.denominator}.json"


def write_certificates(records, directory) -> list:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    for r in records:
        if r.certificate is None:
            continue
        p = d / certificate_name(r.delta)
        with open(p, "w", newline="\n") as fh:
            dump_json(r.certificate, fh)
        paths.append(p)
    return paths
