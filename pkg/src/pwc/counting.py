"""Counting periodic orbits through intervals adjacent to the breakpoints.

For each breakpoint ``x_i`` let ``F_i`` and ``G_i`` be the quasi-partition
intervals ending and starting at ``x_i``. Two such intervals are equivalent
when some forward images of both land in a common member of that family.
Every periodic orbit owns its own class, so the number of classes bounds the
number of orbits.
"""
from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass

from .errors import InconsistencyError, TheoremViolation
from .partition import BackwardClosure, QuasiPartition
from .scalar import fmt


@dataclass(frozen=True)
class BoundaryIntervalTable:
    """``F[i-1]``/``G[i-1]`` are interval indices for breakpoint ``i``; ``F0``/``Gn`` touch the domain ends."""

    F: tuple
    G: tuple
    F0: int
    Gn: int

    @property
    def members(self) -> tuple:
        """Distinct intervals among F_1, G_1, ..., F_{n-1}, G_{n-1}."""
        return tuple(sorted(set(self.F) | set(self.G)))

    def tags(self, member: int) -> list:
        out = [("F", i) for i, l in enumerate(self.F, 1) if l == member]
        return out + [("G", i) for i, l in enumerate(self.G, 1) if l == member]


@dataclass(frozen=True)
class Witness:
    first: int
    second: int
    steps_first: int
    steps_second: int
    meet: int


@dataclass(frozen=True)
class EquivalenceClasses:
    members: tuple
    classes: tuple
    witnesses: tuple
    horizon: int

    @property
    def count(self) -> int:
        return len(self.classes)

    def class_of(self, member: int) -> int:
        for k, cls in enumerate(self.classes):
            if member in cls:
                return k
        raise KeyError(member)


@dataclass(frozen=True)
class OrbitBoundReport:
    num_orbits: int
    class_count: int
    n: int
    n_base: int | None
    injection: tuple
    hypotheses_met: bool = True

    def to_json(self) -> dict:
        return {
            "num_orbits": self.num_orbits,
            "class_count": self.class_count,
            "n": self.n,
            "n_base": self.n_base,
            "injection": list(self.injection),
            "hypotheses_met": self.hypotheses_met,
        }


def boundary_intervals(qp: QuasiPartition, breakpoints) -> BoundaryIntervalTable:
    F, G = [], []
    b = qp.boundaries
    for x in breakpoints:
        j = bisect_left(b, x)
        if j == 0 or j >= len(b) - 1 or b[j] != x:
            raise InconsistencyError(f"breakpoint {fmt(x)} is not an interior interval endpoint")
        F.append(j)
        G.append(j + 1)
    return BoundaryIntervalTable(tuple(F), tuple(G), 1, qp.m)


def _first_visits(qp: QuasiPartition, start: int, targets: set, horizon: int) -> dict:
    seen = {}
    for t, l in enumerate(qp.tau_path(start, horizon)):
        if l in targets and l not in seen:
            seen[l] = t
    return seen


def equivalence_classes(qp: QuasiPartition, table: BoundaryIntervalTable, horizon: int | None = None):
    """Classes of the relation on ``table.members`` decided on the transition graph.

    ``horizon`` defaults to the number of intervals, which is enough for every
    path to enter its cycle. A smaller horizon can only merge fewer members.
    """
    horizon = qp.m if horizon is None else horizon
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    members = table.members
    targets = set(members)
    visits = {c: _first_visits(qp, c, targets, horizon) for c in members}
    parent = {c: c for c in members}

    def find(c):
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    witnesses = []
    for a_i, a in enumerate(members):
        for b in members[a_i + 1:]:
            common = visits[a].keys() & visits[b].keys()
            if not common:
                continue
            meet = min(common, key=lambda c: (visits[a][c] + visits[b][c], c))
            witnesses.append(Witness(a, b, visits[a][meet], visits[b][meet], meet))
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups: dict = {}
    for c in members:
        groups.setdefault(find(c), []).append(c)
    classes = tuple(sorted(tuple(g) for g in groups.values()))
    return EquivalenceClasses(members, classes, tuple(witnesses), horizon)


def check_witness(qp: QuasiPartition, w: Witness, members) -> bool:
    a = qp.tau_path(w.first, w.steps_first)[-1]
    b = qp.tau_path(w.second, w.steps_second)[-1]
    return a == b == w.meet and w.meet in members


def verify_orbit_bound(
    pc,
    orbits,
    classes: EquivalenceClasses,
    n: int | None = None,
    mod_one: bool = False,
    n_base: int | None = None,
    closure: BackwardClosure | None = None,
) -> OrbitBoundReport:
    """Check ``#orbits <= #classes <= n`` and, for mod-1 reductions, ``#orbits <= 2 n_base``.

    Raises :class:`TheoremViolation` when a bound fails while the genericity
    hypotheses hold (backward orbits of distinct breakpoints are disjoint).
    """
    n = pc.n if n is None else n
    hypotheses = closure.disjoint if closure is not None else True
    members = set(classes.members)
    injection = []
    problems = []
    for k, orb in enumerate(orbits):
        owned = [l for l in orb.interval_cycle if l in members]
        if not owned:
            problems.append(f"orbit {k} meets no breakpoint-adjacent interval")
            injection.append(None)
            continue
        cls = {classes.class_of(l) for l in owned}
        if len(cls) > 1:
            problems.append(f"orbit {k} spans several classes")
        injection.append(min(cls))
    assigned = [c for c in injection if c is not None]
    if len(set(assigned)) != len(assigned):
        problems.append("two orbits share an equivalence class")
    if len(orbits) > classes.count:
        problems.append(f"{len(orbits)} orbits exceed {classes.count} classes")
    if classes.count > n:
        problems.append(f"{classes.count} classes exceed n = {n}")
    if mod_one:
        if n_base is None:
            raise ValueError("n_base is required for mod-1 reductions")
        if len(orbits) > 2 * n_base:
            problems.append(f"{len(orbits)} orbits exceed 2 n_base = {2 * n_base}")
    if problems and hypotheses:
        raise TheoremViolation("; ".join(problems))
    return OrbitBoundReport(len(orbits), classes.count, n, n_base, tuple(injection), hypotheses)


def reaches_boundary(qp: QuasiPartition, table: BoundaryIntervalTable) -> dict:
    """Steps needed by each interval's transition path to hit a breakpoint-adjacent interval (None if never)."""
    targets = set(table.members)
    out = {}
    for l in range(1, qp.m + 1):
        path = qp.tau_path(l, qp.m)
        out[l] = next((t for t, j in enumerate(path) if j in targets), None)
    return out


def ordering_witness(qp: QuasiPartition, closure: BackwardClosure):
    """Permutation ``i_1..i_{n-1}`` ordering the minima of the backward orbits, and the intervals ``(a_{k-1}, b_k)``.

    Needs pairwise disjoint backward orbits. Raises InconsistencyError if an
    interval fails to be a quasi-partition component or ``a_{k-1}`` does not
    come from an earlier backward orbit.
    """
    if not closure.disjoint:
        raise ValueError("backward orbits of the breakpoints intersect")
    lo = qp.boundaries[0]
    mins = [min(q for q in Qi if q > lo) for Qi in closure.per_breakpoint]
    perm = sorted(range(1, len(mins) + 1), key=lambda i: mins[i - 1])
    inner = sorted(q for q in closure.points if q > lo)
    comps = set(qp.intervals)
    pairs = []
    for k in range(2, len(perm) + 1):
        b_k = mins[perm[k - 1] - 1]
        a = max(q for q in inner if q < b_k)
        if (a, b_k) not in comps:
            raise InconsistencyError(f"({fmt(a)}, {fmt(b_k)}) is not a quasi-partition interval")
        if not any(a in closure.per_breakpoint[i - 1] for i in perm[: k - 1]):
            raise InconsistencyError(f"{fmt(a)} does not come from an earlier backward orbit")
        pairs.append((a, b_k))
    return tuple(perm), tuple(pairs)
