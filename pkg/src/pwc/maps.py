"""Piecewise contractions, the mod-1 family and its reduction.

Cells are left-closed right-open ``[x_{i-1}, x_i)``. The single exception is a
breakpoint produced by :func:`reduce_mod_one` where a *decreasing* branch
crosses an integer: there the true mod-1 map takes the left-hand limit (0), so
the breakpoint is owned by the cell on its left. Such breakpoints are flagged
in ``PiecewiseContraction.right_closed``. Users never set this flag by hand.

Branch and cell indices are 1-based throughout.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import InitVar, dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

from .errors import (
    BadParameterError,
    DomainError,
    InvalidMapError,
    UnsupportedError,
)
from .scalar import INF, NEG_INF, Bound, fmt, frac_part, parse_bound, to_scalar


@dataclass(frozen=True)
class AffineBranch:
    """The affine map ``x -> slope*x + intercept``."""

    slope: Fraction
    intercept: Fraction

    def __post_init__(self):
        object.__setattr__(self, "slope", to_scalar(self.slope))
        object.__setattr__(self, "intercept", to_scalar(self.intercept))

    def __call__(self, x):
        return self.slope * x + self.intercept

    @property
    def lipschitz(self) -> Fraction:
        return abs(self.slope)

    def then(self, other: "AffineBranch") -> "AffineBranch":
        """Composition that applies ``self`` first and ``other`` second."""
        return AffineBranch(other.slope * self.slope, other.slope * self.intercept + other.intercept)

    def shifted(self, delta) -> "AffineBranch":
        return AffineBranch(self.slope, self.intercept + delta)

    def image(self, a, b) -> tuple:
        """Endpoints (low, high) of the image of the interval between a and b."""
        u, v = self(a), self(b)
        return (u, v) if u <= v else (v, u)


IDENTITY = AffineBranch(1, 0)


@dataclass(frozen=True)
class PiecewiseContraction:
    """An n-interval piecewise contraction on ``[domain_lo, domain_hi)``.

    ``domain_lo``/``domain_hi`` may be ``-inf``/``inf`` for the real line, in
    which case the first and last branches extend to infinity. Branches are
    normally :class:`AffineBranch`; any callable with a ``lipschitz``
    attribute and monotone pieces (see :class:`pwc.ifs.ClampedBranch`) is
    accepted for evaluation only.

    Pass ``validate_images=False`` to skip the self-map check, which is needed
    for the raw base map of a mod-1 family whose values leave ``[0, 1)``.
    """

    domain_lo: Bound
    domain_hi: Bound
    breakpoints: tuple
    branches: tuple
    right_closed: tuple = ()
    validate_images: InitVar[bool] = True

    def __post_init__(self, validate_images: bool):
        lo, hi = parse_bound(self.domain_lo), parse_bound(self.domain_hi)
        bps = tuple(to_scalar(b) for b in self.breakpoints)
        branches = tuple(self.branches)
        rc = tuple(bool(f) for f in self.right_closed) or (False,) * len(bps)
        object.__setattr__(self, "domain_lo", lo)
        object.__setattr__(self, "domain_hi", hi)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "branches", branches)
        object.__setattr__(self, "right_closed", rc)

        if lo == INF or hi == NEG_INF or not lo < hi:
            raise InvalidMapError(f"empty domain [{lo}, {hi})")
        if len(branches) != len(bps) + 1:
            raise InvalidMapError(f"{len(branches)} branches for {len(bps)} breakpoints")
        if len(rc) != len(bps):
            raise InvalidMapError("right_closed must have one flag per breakpoint")
        pts = (lo,) + bps + (hi,)
        if any(not a < b for a, b in zip(pts, pts[1:])):
            raise InvalidMapError("breakpoints must be strictly increasing inside the open domain")
        for i, br in enumerate(branches, 1):
            if not br.lipschitz < 1:
                raise InvalidMapError(f"branch {i} is not a contraction (Lipschitz {br.lipschitz})")
        if validate_images:
            self._check_self_map()

    def _check_self_map(self):
        lo, hi = self.domain_lo, self.domain_hi
        for i, br in enumerate(self.branches, 1):
            a, b, a_closed, b_closed = self.cell_bounds(i)
            for end, closed in ((a, a_closed), (b, b_closed)):
                if math.isinf(end):
                    if not math.isinf(lo) or not math.isinf(hi):
                        raise InvalidMapError("unbounded cell inside a bounded domain")
                    continue
                v = br(end)
                if not lo <= v <= hi or (closed and not v < hi):
                    raise InvalidMapError(
                        f"branch {i} maps cell endpoint {fmt(end)} to {fmt(v)}, outside the domain"
                    )

    # --- structure -------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.branches)

    @property
    def is_real_line(self) -> bool:
        return self.domain_lo == NEG_INF and self.domain_hi == INF

    @property
    def is_affine(self) -> bool:
        return all(isinstance(b, AffineBranch) for b in self.branches)

    @property
    def uniform_slope(self):
        """The common slope of all branches, or None when slopes differ."""
        if not self.is_affine:
            return None
        slopes = {b.slope for b in self.branches}
        return slopes.pop() if len(slopes) == 1 else None

    @property
    def cell_ends(self) -> tuple:
        return (self.domain_lo,) + self.breakpoints + (self.domain_hi,)

    def cell_bounds(self, i: int):
        """``(a, b, a_closed, b_closed)`` for cell ``i`` (1-based)."""
        ends = self.cell_ends
        a, b = ends[i - 1], ends[i]
        a_closed = i == 1 and not math.isinf(a) or i > 1 and not self.right_closed[i - 2]
        b_closed = i < self.n and self.right_closed[i - 1]
        return a, b, a_closed, b_closed

    def cell_contains(self, i: int, x) -> bool:
        a, b, a_closed, b_closed = self.cell_bounds(i)
        return (a < x or a_closed and x == a) and (x < b or b_closed and x == b)

    def cell_index(self, x) -> int:
        if isinstance(x, float):
            raise TypeError("exact evaluation needs a rational point, not a float")
        if not (self.domain_lo <= x < self.domain_hi):
            raise DomainError(f"{x} is outside [{self.domain_lo}, {self.domain_hi})")
        j = bisect_right(self.breakpoints, x)
        if j > 0 and self.breakpoints[j - 1] == x and self.right_closed[j - 1]:
            return j
        return j + 1

    # --- evaluation ------------------------------------------------------

    def eval(self, x):
        """Return ``(f(x), branch_index)``."""
        i = self.cell_index(x)
        return self.branches[i - 1](x), i

    def __call__(self, x):
        return self.eval(x)[0]

    def with_breakpoints(self, breakpoints: Sequence, *, validate_images: bool = True):
        return PiecewiseContraction(
            self.domain_lo, self.domain_hi, tuple(breakpoints), self.branches,
            self.right_closed, validate_images=validate_images,
        )

    def restricted(self, lo, hi) -> "PiecewiseContraction":
        """Same branches and breakpoints on the sub-domain ``[lo, hi)``."""
        return PiecewiseContraction(lo, hi, self.breakpoints, self.branches, self.right_closed)


def piecewise(breakpoints, intercepts, slope=None, slopes=None, domain=(0, 1), **kw):
    """Convenience constructor for affine piecewise maps."""
    if slopes is None:
        slopes = [slope] * len(intercepts)
    branches = tuple(AffineBranch(s, b) for s, b in zip(slopes, intercepts, strict=True))
    return PiecewiseContraction(domain[0], domain[1], tuple(breakpoints), branches, **kw)


def evaluate(pc: PiecewiseContraction, x):
    return pc.eval(to_scalar(x))


# --- mod-1 family ---------------------------------------------------------


@dataclass(frozen=True)
class ModOneFamily:
    """``f_delta = f + delta (mod 1)`` for a base map on ``[0, 1)``."""

    base: PiecewiseContraction
    delta: Fraction = field(default=Fraction(0))

    def __post_init__(self):
        object.__setattr__(self, "delta", to_scalar(self.delta))
        b = self.base
        if b.domain_lo != 0 or b.domain_hi != 1:
            raise InvalidMapError("a mod-1 family needs its base on [0, 1)")
        if not b.is_affine:
            raise UnsupportedError("mod-1 reduction needs affine branches")
        ends = b.cell_ends
        for i, br in enumerate(b.branches, 1):
            if not abs(br.slope) * (ends[i] - ends[i - 1]) < 1:
                raise InvalidMapError(f"branch {i} image has length >= 1")

    @property
    def n_base(self) -> int:
        return self.base.n

    def at(self, delta) -> "ModOneFamily":
        return ModOneFamily(self.base, delta)

    def raw(self, x):
        """Unreduced value ``f(x) + delta`` and the base branch index."""
        v, i = self.base.eval(x)
        return v + self.delta, i

    def value(self, x) -> Fraction:
        return frac_part(self.raw(x)[0])


def endpoint_images(family: ModOneFamily):
    """Yield ``(branch, endpoint, f_i(endpoint) + delta)`` for both ends of every cell."""
    ends = family.base.cell_ends
    for i, br in enumerate(family.base.branches, 1):
        for e in (ends[i - 1], ends[i]):
            yield i, e, br(e) + family.delta


def bad_delta_check(family: ModOneFamily) -> bool:
    """True iff some cell endpoint image is an integer (delta is in the bad set)."""
    return any(v.denominator == 1 for _, _, v in endpoint_images(family))


def bad_deltas(base: PiecewiseContraction, lo, hi) -> list:
    """All bad shifts in ``[lo, hi]``, sorted."""
    lo, hi = to_scalar(lo), to_scalar(hi)
    out = set()
    for _, _, v in endpoint_images(ModOneFamily(base, 0)):
        for k in range(math.ceil(lo + v), math.floor(hi + v) + 1):
            out.add(k - v)
    return sorted(out)


def reduce_mod_one(family: ModOneFamily) -> PiecewiseContraction:
    """Rewrite ``f + delta (mod 1)`` as an m-interval map on [0, 1), n <= m <= 2n.

    Each branch is split at most once, where ``slope*x + b_i + delta`` crosses
    an integer.
    """
    if bad_delta_check(family):
        raise BadParameterError(f"delta = {fmt(family.delta)} makes a cell endpoint image an integer")
    ends = family.base.cell_ends
    bps, branches, rc = [], [], []
    for i, br in enumerate(family.base.branches, 1):
        a, b = ends[i - 1], ends[i]
        g = br.shifted(family.delta)
        ka, kb = math.floor(g(a)), math.floor(g(b))
        if i > 1:
            bps.append(a)
            rc.append(False)
        if ka == kb:
            branches.append(g.shifted(-ka))
            continue
        if g.slope > 0:
            s = (kb - g.intercept) / g.slope
            right_owned = False
        else:
            s = (ka - g.intercept) / g.slope
            right_owned = True
        branches += [g.shifted(-ka), g.shifted(-kb)]
        bps.append(s)
        rc.append(right_owned)
    return PiecewiseContraction(0, 1, tuple(bps), tuple(branches), tuple(rc))


# --- real-line tools ------------------------------------------------------


def add_constant(pc: PiecewiseContraction, delta) -> PiecewiseContraction:
    """The map ``f + delta`` (no reduction); intended for real-line maps."""
    delta = to_scalar(delta)
    return PiecewiseContraction(
        pc.domain_lo, pc.domain_hi, pc.breakpoints,
        tuple(b.shifted(delta) for b in pc.branches), pc.right_closed,
    )


def conjugacy_offset(slope, delta) -> Fraction:
    """``delta / (1 - slope)``, the translation ``h(x) = x + offset``."""
    slope, delta = to_scalar(slope), to_scalar(delta)
    return delta / (1 - slope)


def conjugate_shift(pc: PiecewiseContraction, delta) -> PiecewiseContraction:
    """Map with breakpoints moved to ``c_i - delta/(1 - slope)``, same branches.

    With ``h(x) = x + delta/(1 - slope)`` the result ``g`` satisfies
    ``h(g(x)) == (pc + delta)(h(x))`` exactly.
    """
    if not pc.is_real_line:
        raise UnsupportedError("conjugate_shift works on real-line maps")
    lam = pc.uniform_slope
    if lam is None:
        raise UnsupportedError("conjugate_shift needs a single common slope")
    off = conjugacy_offset(lam, delta)
    return PiecewiseContraction(
        pc.domain_lo, pc.domain_hi, tuple(c - off for c in pc.breakpoints), pc.branches, pc.right_closed
    )


def generic_position_check(pc: PiecewiseContraction, depth: int) -> bool:
    """False iff some breakpoint equals ``h(x_i)`` for a composition ``h`` of 1..depth branches.

    ``x_i`` ranges over the left domain end and the interior breakpoints.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    targets = set(pc.breakpoints)
    if not targets:
        return True
    level = {x for x in (pc.domain_lo,) + pc.breakpoints if not math.isinf(x)}
    for _ in range(depth):
        level = {br(v) for v in level for br in pc.branches}
        if level & targets:
            return False
    return True


# --- JSON ------------------------------------------------------------------


def map_to_json(pc: PiecewiseContraction) -> dict:
    if not pc.is_affine:
        raise UnsupportedError("only affine maps serialize")
    lam = pc.uniform_slope
    doc: dict[str, Any] = {
        "domain": [fmt(pc.domain_lo), fmt(pc.domain_hi)],
        "slope": fmt(lam) if lam is not None else [fmt(b.slope) for b in pc.branches],
        "breakpoints": [fmt(x) for x in pc.breakpoints],
        "intercepts": [fmt(b.intercept) for b in pc.branches],
    }
    if any(pc.right_closed):
        doc["right_closed"] = [j for j, f in enumerate(pc.right_closed, 1) if f]
    return doc


def _reject_floats(values: Iterable):
    for v in values:
        if isinstance(v, float):
            raise InvalidMapError(f"rational {v!r} must be given as a string 'p/q'")


def map_from_json(doc: dict, *, validate_images: bool = True) -> PiecewiseContraction:
    try:
        domain = doc.get("domain", ["0", "1"])
        bps = list(doc.get("breakpoints", []))
        intercepts = list(doc["intercepts"])
        slope = doc["slope"]
        slopes = list(slope) if isinstance(slope, list) else [slope] * len(intercepts)
        _reject_floats(list(domain) + bps + intercepts + slopes)
        flags = [False] * len(bps)
        for j in doc.get("right_closed", []):
            flags[int(j) - 1] = True
        branches = tuple(AffineBranch(to_scalar(s), to_scalar(b)) for s, b in zip(slopes, intercepts, strict=True))
        return PiecewiseContraction(
            parse_bound(domain[0]), parse_bound(domain[1]), tuple(to_scalar(x) for x in bps),
            branches, tuple(flags), validate_images=validate_images,
        )
    except (KeyError, TypeError, ValueError, IndexError, ZeroDivisionError) as exc:
        if isinstance(exc, InvalidMapError):
            raise
        raise InvalidMapError(f"malformed map definition: {exc}") from exc


def family_from_json(doc: dict) -> ModOneFamily:
    """A mod-1 family: the map schema plus an optional ``"delta"``."""
    base = map_from_json(doc, validate_images=False)
    return ModOneFamily(base, to_scalar(doc.get("delta", "0")))
