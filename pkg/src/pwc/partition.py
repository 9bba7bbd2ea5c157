"""Backward closure of the breakpoints, invariant quasi-partitions and their periodic orbits."""
from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction

from .errors import DegenerateSlopeError, InconsistencyError, NonGenericError, UnsupportedError
from .intervals import IntervalUnion
from .maps import AffineBranch, PiecewiseContraction, map_to_json
from .orbits import PeriodicOrbitCert, fixed_point_of_composition
from .scalar import fmt, to_scalar

DEFAULT_MAX_POINTS = 100_000
DEFAULT_MAX_DEPTH = 10_000


@dataclass(frozen=True)
class BackwardClosure:
    per_breakpoint: tuple
    points: tuple
    finite: bool
    depth_reached: int
    work: int = 0

    @property
    def disjoint(self) -> bool:
        """Whether the backward orbits of distinct breakpoints never meet."""
        return sum(map(len, self.per_breakpoint)) == len(self.points)


@dataclass(frozen=True)
class QuasiPartition:
    """Open intervals ``J_l = (boundaries[l-1], boundaries[l])``, l = 1..m.

    ``tau[l-1]`` is the index of the interval containing ``f(J_l)`` and
    ``eta[l-1]`` the cell (branch) containing ``J_l``.
    """

    boundaries: tuple
    tau: tuple
    eta: tuple
    Q: tuple

    @property
    def m(self) -> int:
        return len(self.tau)

    @property
    def intervals(self) -> tuple:
        b = self.boundaries
        return tuple(zip(b, b[1:]))

    def interval(self, l: int):
        return self.boundaries[l - 1], self.boundaries[l]

    def locate(self, y):
        """Index of the interval containing ``y``, or None if ``y`` is a boundary point."""
        j = bisect_left(self.boundaries, y)
        if j < len(self.boundaries) and self.boundaries[j] == y:
            return None
        if j == 0 or j == len(self.boundaries):
            return None
        return j

    def tau_path(self, l: int, steps: int) -> list:
        path = [l]
        for _ in range(steps):
            path.append(self.tau[path[-1] - 1])
        return path


def _affine_only(pc: PiecewiseContraction):
    if not pc.is_affine:
        raise UnsupportedError("quasi-partitions need affine branches")


def preimages(pc: PiecewiseContraction, y) -> frozenset:
    """All ``x`` with ``f(x) == y``."""
    _affine_only(pc)
    y = to_scalar(y)
    out = set()
    for i, br in enumerate(pc.branches, 1):
        if br.slope == 0:
            raise DegenerateSlopeError(f"branch {i} has slope 0")
        x = (y - br.intercept) / br.slope
        if pc.cell_contains(i, x):
            out.add(x)
    return frozenset(out)


def backward_closure(
    pc: PiecewiseContraction, max_points: int = DEFAULT_MAX_POINTS, max_depth: int = DEFAULT_MAX_DEPTH
) -> BackwardClosure:
    """Breadth-first closure of the breakpoints under preimages.

    ``finite`` is False when a budget ran out first; that is an inconclusive
    answer, not an error.
    """
    _affine_only(pc)
    if not pc.breakpoints:
        raise ValueError("backward closure needs at least one breakpoint")
    per, union = [], set()
    finite, deepest, work = True, 0, 0
    for x in pc.breakpoints:
        seen, frontier, depth = {x}, [x], 0
        while frontier and finite:
            if depth >= max_depth:
                finite = False
                break
            depth += 1
            nxt = []
            for q in frontier:
                work += pc.n
                for p in preimages(pc, q):
                    if p not in seen:
                        seen.add(p)
                        nxt.append(p)
            frontier = nxt
            if len(union) + len(seen) > max_points:
                finite = False
        deepest = max(deepest, depth)
        per.append(frozenset(seen))
        union |= seen
        if not finite:
            break
    return BackwardClosure(tuple(per), tuple(sorted(union)), finite, deepest, work)


def build_quasi_partition(pc: PiecewiseContraction, closure: BackwardClosure) -> QuasiPartition:
    """Connected components of the open domain minus Q, with verified transitions."""
    _affine_only(pc)
    if not closure.finite:
        raise ValueError("closure is not finite")
    if math.isinf(pc.domain_lo) or math.isinf(pc.domain_hi):
        raise UnsupportedError("trim real-line maps to a bounded window first")
    Q = tuple(q for q in closure.points if pc.domain_lo < q < pc.domain_hi)
    bounds = (pc.domain_lo,) + Q + (pc.domain_hi,)
    qp = QuasiPartition(bounds, (), (), tuple(closure.points))
    tau, eta = [], []
    for l, (a, b) in enumerate(qp.intervals, 1):
        mid = (a + b) / 2
        y, i = pc.eval(mid)
        ca, cb, _, _ = pc.cell_bounds(i)
        if a < ca or b > cb:
            raise InconsistencyError(f"interval {l} straddles a breakpoint")
        t = qp.locate(y)
        if t is None:
            raise InconsistencyError(f"image of interval {l} midpoint hits a boundary point")
        lo, hi = pc.branches[i - 1].image(a, b)
        ta, tb = qp.interval(t)
        inside = ta < lo and hi < tb if lo == hi else ta <= lo and hi <= tb
        if not inside:
            raise InconsistencyError(f"f(J_{l}) is not inside J_{t}; the closure is not closed")
        tau.append(t)
        eta.append(i)
    return QuasiPartition(bounds, tuple(tau), tuple(eta), tuple(closure.points))


def tau_cycles(tau) -> tuple:
    """Cycles of the functional graph of ``tau`` and, per node, the index of the cycle it reaches."""
    m = len(tau)
    cycle_of = [None] * (m + 1)
    cycles = []
    for start in range(1, m + 1):
        path, pos = [], {}
        l = start
        while cycle_of[l] is None and l not in pos:
            pos[l] = len(path)
            path.append(l)
            l = tau[l - 1]
        if cycle_of[l] is None:
            cyc = path[pos[l]:]
            k = len(cycles)
            cycles.append(tuple(cyc))
            for c in cyc:
                cycle_of[c] = k
        for node in path:
            cycle_of[node] = cycle_of[l]
    return tuple(cycles), tuple(cycle_of[1:])


def extract_periodic_orbits(pc: PiecewiseContraction, qp: QuasiPartition) -> list:
    """One exact periodic orbit per cycle of the transition map, sorted by smallest point."""
    _affine_only(pc)
    cycles, cycle_of = tau_cycles(qp.tau)
    certs = []
    for k, cyc in enumerate(cycles):
        word = [qp.eta[l - 1] for l in cyc]
        z = fixed_point_of_composition([pc.branches[i - 1] for i in word])
        pts = []
        for l, i in zip(cyc, word):
            a, b = qp.interval(l)
            if not a < z < b:
                raise NonGenericError(f"periodic point {fmt(z)} is not inside J_{l} = ({fmt(a)}, {fmt(b)})")
            pts.append(z)
            z = pc.branches[i - 1](z)
        if z != pts[0]:
            raise InconsistencyError("composed fixed point does not close up")
        j = min(range(len(pts)), key=pts.__getitem__)
        basin = tuple(l for l in range(1, qp.m + 1) if cycle_of[l - 1] == k)
        certs.append(PeriodicOrbitCert(
            tuple(pts[j:] + pts[:j]), len(pts), tuple(word[j:] + word[:j]),
            tuple(cyc[j:] + cyc[:j]), basin,
        ))
    certs.sort(key=lambda c: c.points[0])
    return certs


def attractor_iterates(branches, k: int, domain=(0, 1)):
    """``(A_k, length)`` where ``A_0`` is the closed domain and ``A_{j+1}`` the union of branch images of ``A_j``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if not branches:
        raise ValueError("need at least one branch")
    branches = [b if isinstance(b, AffineBranch) else AffineBranch(*b) for b in branches]
    a = IntervalUnion.from_intervals([(to_scalar(domain[0]), to_scalar(domain[1]))])
    for _ in range(k):
        a = a.map(branches)
    return a, a.length


# --- certificates ------------------------------------------------------------


def certificate(pc: PiecewiseContraction, qp: QuasiPartition, orbits, extra: dict | None = None) -> dict:
    doc = {
        "map": map_to_json(pc),
        "Q": [fmt(q) for q in qp.Q],
        "intervals": [[fmt(a), fmt(b)] for a, b in qp.intervals],
        "tau": list(qp.tau),
        "orbits": [o.to_json() for o in orbits],
    }
    if extra:
        doc.update(extra)
    return doc


def verify_certificate(cert: dict, pc: PiecewiseContraction) -> list:
    """Re-check a certificate against the map using direct evaluation only.

    Returns a list of problems; an empty list means the certificate holds.
    """
    problems = []
    try:
        Q = [to_scalar(q) for q in cert["Q"]]
        ivs = [(to_scalar(a), to_scalar(b)) for a, b in cert["intervals"]]
        tau = [int(t) for t in cert["tau"]]
    except (KeyError, TypeError, ValueError) as exc:
        return [f"malformed certificate: {exc}"]
    inner = sorted(q for q in set(Q) if pc.domain_lo < q < pc.domain_hi)
    bounds = [pc.domain_lo] + inner + [pc.domain_hi]
    if ivs != list(zip(bounds, bounds[1:])):
        problems.append("intervals are not the components of the domain minus Q")
    if not set(pc.breakpoints) <= set(Q):
        problems.append("some breakpoint is missing from Q")
    if len(tau) != len(ivs) or any(not 1 <= t <= len(ivs) for t in tau):
        problems.append("tau has the wrong shape")
        return problems
    for l, ((a, b), t) in enumerate(zip(ivs, tau), 1):
        y, i = pc.eval((a + b) / 2)
        ca, cb, _, _ = pc.cell_bounds(i)
        if a < ca or b > cb:
            problems.append(f"J_{l} is not inside a single cell")
            continue
        lo, hi = pc.branches[i - 1].image(a, b)
        ta, tb = ivs[t - 1]
        ok = ta < lo and hi < tb if lo == hi else ta <= lo and hi <= tb
        if not ok:
            problems.append(f"f(J_{l}) is not inside J_{t}")
    for k, orb in enumerate(cert.get("orbits", [])):
        try:
            pts = [to_scalar(p) for p in orb["points"]]
            word = [int(w) for w in orb["word"]]
            period = int(orb["period"])
        except (KeyError, TypeError, ValueError) as exc:
            problems.append(f"orbit {k}: malformed ({exc})")
            continue
        if not (len(pts) == len(word) == period >= 1):
            problems.append(f"orbit {k}: inconsistent lengths")
            continue
        if len(set(pts)) != period:
            problems.append(f"orbit {k}: points are not distinct")
        z = pts[0]
        for j in range(period):
            if z != pts[j]:
                problems.append(f"orbit {k}: step {j} lands on {fmt(z)}, expected {fmt(pts[j])}")
                break
            if z in pc.breakpoints or z == pc.domain_lo:
                problems.append(f"orbit {k}: point {fmt(z)} is on a cell boundary")
            if not pc.domain_lo <= z < pc.domain_hi:
                problems.append(f"orbit {k}: point {fmt(z)} is outside the domain")
                break
            if "intervals" in orb:
                idx = int(orb["intervals"][j]) if j < len(orb["intervals"]) else 0
                if not 1 <= idx <= len(ivs):
                    problems.append(f"orbit {k}: bad interval index")
                    break
                a, b = ivs[idx - 1]
                if not a < z < b:
                    problems.append(f"orbit {k}: point {fmt(z)} is outside its interval")
            z, i = pc.eval(z)
            if i != word[j]:
                problems.append(f"orbit {k}: step {j} used branch {i}, word says {word[j]}")
        else:
            if z != pts[0]:
                problems.append(f"orbit {k}: f^p(z) != z")
    return problems
