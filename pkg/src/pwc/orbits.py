"""Forward orbits, itineraries and certified periodic cycles.

Floating point is only used to *find* a candidate cycle. Every reported cycle
is recomputed exactly from its branch word: the composition along the word is
an affine contraction whose fixed point is the exact periodic point. A cycle
is certified once the exact cycle is verified and the starting orbit is shown
to enter its trapping neighbourhood (the union of balls around the cycle
points that stay inside their cells), from where convergence is automatic.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .errors import DomainError, NotAContractionError, UnsupportedError
from .maps import IDENTITY, AffineBranch, PiecewiseContraction
from .scalar import bit_size, fmt, to_scalar

DEFAULT_BUDGET = 100_000
DEFAULT_EPSILON = 1e-9
DEFAULT_BIT_CAP = 10**6
TAIL = 8


@dataclass(frozen=True)
class OrbitTrace:
    start: object
    points: tuple
    digits: tuple
    exact: bool = True

    def to_json(self) -> dict:
        render = fmt if self.exact else float
        return {
            "start": render(self.start),
            "exact": self.exact,
            "points": [render(p) for p in self.points],
            "digits": list(self.digits),
        }


@dataclass(frozen=True)
class CycleReport:
    """Outcome of :func:`detect_cycle`.

    ``cycle_points`` start at the smallest point; ``branch_word`` is aligned
    with them. ``phase`` is the index of the cycle point the orbit of the
    start is near at step ``preperiod``.
    """

    preperiod: int
    period: int
    cycle_points: tuple
    certified: bool
    branch_word: tuple
    phase: int = 0
    reason: str | None = None
    steps: int = 0


@dataclass(frozen=True)
class Inconclusive:
    """No cycle was certified within the budget. Not an error."""

    reason: str
    steps: int
    tail: tuple = ()


@dataclass(frozen=True)
class PeriodicOrbitCert:
    """An exactly periodic orbit.

    ``interval_cycle`` lists the quasi-partition intervals visited (empty when
    the orbit came from forward iteration alone) and ``basin`` the intervals
    whose transition path ends on that cycle.
    """

    points: tuple
    period: int
    branch_word: tuple
    interval_cycle: tuple = ()
    basin: tuple = field(default=(), compare=False)

    def to_json(self) -> dict:
        doc = {"points": [fmt(p) for p in self.points], "period": self.period, "word": list(self.branch_word)}
        if self.interval_cycle:
            doc["intervals"] = list(self.interval_cycle)
        return doc


# --- float projection ------------------------------------------------------


class FloatMap:
    """Binary-float projection of an affine map, for fast candidate search only."""

    def __init__(self, pc: PiecewiseContraction):
        if not pc.is_affine:
            raise UnsupportedError("float projection needs affine branches")
        self.lo = float(pc.domain_lo)
        self.hi = float(pc.domain_hi)
        self.top = math.nextafter(self.hi, -math.inf) if math.isfinite(self.hi) else self.hi
        self.bps = [float(x) for x in pc.breakpoints]
        self.rc = pc.right_closed
        self.slopes = [float(b.slope) for b in pc.branches]
        self.intercepts = [float(b.intercept) for b in pc.branches]

    def eval(self, x: float):
        j = bisect_right(self.bps, x)
        if j > 0 and self.bps[j - 1] == x and self.rc[j - 1]:
            j -= 1
        v = self.slopes[j] * x + self.intercepts[j]
        # keep rounding drift inside [lo, hi)
        v = min(max(v, self.lo), self.top)
        return v, j + 1


# --- iteration -------------------------------------------------------------


def iterate_with_itinerary(pc: PiecewiseContraction, x, steps: int, *, exact: bool = True) -> OrbitTrace:
    """Orbit ``x, f(x), ..., f^steps(x)`` with the branch index of every point."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if exact:
        x = to_scalar(x)
        step = pc.eval
        pc.cell_index(x)
    else:
        x = float(x)
        fm = FloatMap(pc)
        if not fm.lo <= x < fm.hi:
            raise DomainError(f"{x} is outside the domain")
        step = fm.eval
    points, digits = [x], []
    cur = x
    for _ in range(steps):
        nxt, d = step(cur)
        digits.append(d)
        points.append(nxt)
        cur = nxt
    digits.append(step(cur)[1])
    return OrbitTrace(x, tuple(points), tuple(digits), exact)


def compose(word: Sequence[AffineBranch]) -> AffineBranch:
    """The affine map applying ``word[0]`` first, then ``word[1]``, and so on."""
    acc = IDENTITY
    for br in word:
        acc = acc.then(br)
    return acc


def fixed_point_of_composition(word: Sequence[AffineBranch]) -> Fraction:
    if not word:
        raise ValueError("empty word")
    h = compose(word)
    if not abs(h.slope) < 1:
        raise NotAContractionError(f"composed slope {fmt(h.slope)} is not a contraction")
    return h.intercept / (1 - h.slope)


def _divisors(p: int):
    return [d for d in range(1, p + 1) if p % d == 0]


def _canonical(points: Sequence, word: Sequence):
    k = min(range(len(points)), key=points.__getitem__)
    return tuple(points[k:]) + tuple(points[:k]), tuple(word[k:]) + tuple(word[:k]), k


def certify_word(pc: PiecewiseContraction, word: Sequence[int]):
    """Exact periodic orbit generated by a branch word.

    Returns ``(points, word)`` of the minimal cycle, rotated to start at its
    smallest point, or ``(None, reason)`` when the word does not realize a
    cycle of ``pc`` strictly inside the cells.
    """
    if not pc.is_affine:
        raise UnsupportedError("certification needs affine branches")
    z0 = fixed_point_of_composition([pc.branches[i - 1] for i in word])
    pts = [z0]
    z = z0
    for j, i in enumerate(word):
        if not pc.domain_lo <= z < pc.domain_hi or pc.cell_index(z) != i:
            return None, f"word letter {j} does not match the cell of {fmt(z)}"
        if z in pc.breakpoints or z == pc.domain_lo:
            return None, f"cycle point {fmt(z)} lies on a cell boundary"
        z = pc.branches[i - 1](z)
        pts.append(z)
    if z != z0:
        return None, "composition fixed point does not close up"
    p = len(word)
    d = next(d for d in _divisors(p) if pts[d] == z0)
    points, w, _ = _canonical(pts[:d], list(word[:d]))
    return points, w


def trap_radius(pc: PiecewiseContraction, points: Sequence[Fraction]):
    """Largest r such that every ball of radius r about a cycle point sits inside its cell."""
    r = math.inf
    for z in points:
        a, b, _, _ = pc.cell_bounds(pc.cell_index(z))
        for e in (a, b):
            if not math.isinf(e):
                r = min(r, abs(z - e))
    return r


def _brent(step: Callable, x0, close: Callable, budget: int):
    """Brent's cycle finding with an approximate equality test.

    Returns ``(mu, lam, work)`` or ``(None, None, work)`` if the budget runs out.
    """
    power = lam = 1
    tortoise, hare = x0, step(x0)
    work = 1
    while not close(tortoise, hare):
        if work >= budget:
            return None, None, work
        if power == lam:
            tortoise = hare
            power *= 2
            lam = 0
        hare = step(hare)
        work += 1
        lam += 1
    tortoise = hare = x0
    for _ in range(lam):
        hare = step(hare)
    work += lam
    mu = 0
    while not close(tortoise, hare):
        if work >= budget:
            return None, None, work
        tortoise, hare = step(tortoise), step(hare)
        work += 2
        mu += 1
    return mu, lam, work


class _BitCapExceeded(Exception):
    pass


def detect_cycle(
    pc: PiecewiseContraction,
    x,
    budget: int = DEFAULT_BUDGET,
    epsilon=DEFAULT_EPSILON,
    *,
    exact: bool = False,
    bit_cap: int = DEFAULT_BIT_CAP,
):
    """Find and certify the periodic cycle the orbit of ``x`` converges to.

    Returns a :class:`CycleReport` (possibly with ``certified=False`` and a
    reason) or :class:`Inconclusive` when no cycle closes within ``budget``
    iterations. ``exact=True`` runs the search on exact rationals; when their
    size passes ``bit_cap`` the search falls back to floats.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    x = to_scalar(x)
    pc.cell_index(x)
    eps = float(epsilon)
    if not eps > 0:
        raise ValueError("epsilon must be positive")

    found = None
    if exact:
        feps = Fraction(eps)

        def step(v):
            w = pc(v)
            if bit_size(w) > bit_cap:
                raise _BitCapExceeded
            return w

        try:
            mu, lam, work = _brent(step, x, lambda a, b: abs(a - b) <= feps, budget)
            orbit_step = pc.eval
            x_start = x
            found = (mu, lam, work)
        except _BitCapExceeded:
            found = None
    if found is None:
        fm = FloatMap(pc)
        x_start = float(x)
        mu, lam, work = _brent(lambda v: fm.eval(v)[0], x_start, lambda a, b: abs(a - b) <= eps, budget)
        orbit_step = fm.eval

    if mu is None:
        tail = []
        v = x_start
        for _ in range(TAIL):
            v = orbit_step(v)[0]
            tail.append(v)
        return Inconclusive(f"no cycle closed within {budget} iterations", work, tuple(tail))

    v = x_start
    for _ in range(mu):
        v = orbit_step(v)[0]
    word = []
    for _ in range(lam):
        v, d = orbit_step(v)
        word.append(d)

    points, w = certify_word(pc, word)
    if points is None:
        return CycleReport(mu, lam, (), False, tuple(word), reason=w, steps=work)
    r = trap_radius(pc, points)
    hit = _enter_trap(pc, x, points, r, mu + lam, bit_cap)
    if hit is None:
        reason = (
            f"orbit not shown to enter the trapping radius {float(r):.3g} "
            "(cycle point within epsilon of a breakpoint)"
        )
        return CycleReport(mu, len(points), points, False, w, reason=reason, steps=work)
    s, phase = hit
    return CycleReport(s, len(points), points, True, w, phase=phase, steps=work)


def _enter_trap(pc, x: Fraction, points, r, horizon: int, bit_cap: int):
    """First ``(k, j)`` with ``|f^k(x) - points[j]| < r`` for exact iterates ``k <= horizon``.

    Falls back to a float check with a safety margin if exact iterates grow
    past ``bit_cap``.
    """
    v = x
    for k in range(horizon + 1):
        for j, z in enumerate(points):
            if abs(v - z) < r:
                return k, j
        if bit_size(v) > bit_cap:
            return _enter_trap_float(pc, float(v), k, points, r, horizon)
        v = pc(v)
    return None


def _enter_trap_float(pc, v: float, k0: int, points, r, horizon: int):
    fm = FloatMap(pc)
    zs = [float(z) for z in points]
    margin = float(r) / 2
    for k in range(k0, horizon + 1):
        for j, z in enumerate(zs):
            if abs(v - z) < margin:
                return k, j
        v = fm.eval(v)[0]
    return None


def omega_limit(pc: PiecewiseContraction, x, budget: int = DEFAULT_BUDGET, **kw):
    """The certified periodic orbit attracting ``x``, or :class:`Inconclusive`."""
    rep = detect_cycle(pc, x, budget, **kw)
    if isinstance(rep, Inconclusive):
        return rep
    if not rep.certified:
        return Inconclusive(rep.reason or "not certified", rep.steps)
    return PeriodicOrbitCert(rep.cycle_points, rep.period, rep.branch_word)
