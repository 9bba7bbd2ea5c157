"""Iterated function systems: contraction tests, clamping, compositions and real-line trimming."""
from __future__ import annotations

import math
from dataclasses import InitVar, dataclass
from fractions import Fraction
from itertools import product

from .errors import BudgetError, InvalidMapError, UnsupportedError
from .maps import IDENTITY, AffineBranch, PiecewiseContraction
from .scalar import INF, NEG_INF, Bound, fmt, parse_bound, to_scalar


@dataclass(frozen=True)
class LipschitzBranch:
    """A non-affine branch known only through a callable and a Lipschitz constant."""

    func: object
    lipschitz: Fraction

    def __call__(self, x):
        return self.func(x)


@dataclass(frozen=True)
class ClampedBranch:
    """``base`` on ``[lo_knot, hi_knot]``, frozen at the knot values outside it.

    The knots may be infinite, which leaves that side unclamped.
    """

    base: object
    lo_knot: Bound = NEG_INF
    hi_knot: Bound = INF

    def __call__(self, x):
        if x < self.lo_knot:
            x = self.lo_knot
        elif x > self.hi_knot:
            x = self.hi_knot
        return self.base(x)

    @property
    def lipschitz(self):
        return self.base.lipschitz

    def pieces(self, lo, hi):
        """``(a, b, AffineBranch)`` pieces over ``[lo, hi]`` for an affine base."""
        if not isinstance(self.base, AffineBranch):
            raise UnsupportedError("pieces need an affine base")
        a, b = max(lo, self.lo_knot), min(hi, self.hi_knot)
        out = []
        if lo < a:
            out.append((lo, a, AffineBranch(0, self.base(a))))
        if a < b:
            out.append((a, b, self.base))
        if b < hi:
            out.append((b, hi, AffineBranch(0, self.base(b))))
        return out


def _derivative_pieces(branch, lo, hi):
    """``(a, b, bound on |derivative|)`` pieces covering ``[lo, hi]``."""
    if isinstance(branch, AffineBranch):
        return [(lo, hi, abs(branch.slope))]
    if isinstance(branch, ClampedBranch):
        a, b = max(lo, branch.lo_knot), min(hi, branch.hi_knot)
        out = [(lo, a, 0)] if lo < a else []
        if a < b:
            out.append((a, b, branch.lipschitz))
        if b < hi:
            out.append((b, hi, 0))
        return out
    return [(lo, hi, branch.lipschitz)]


@dataclass(frozen=True)
class IFSSpec:
    branches: tuple
    domain_lo: Bound = Fraction(0)
    domain_hi: Bound = Fraction(1)
    validate: InitVar[bool] = True

    def __post_init__(self, validate):
        object.__setattr__(self, "branches", tuple(self.branches))
        object.__setattr__(self, "domain_lo", parse_bound(self.domain_lo))
        object.__setattr__(self, "domain_hi", parse_bound(self.domain_hi))
        if not validate:
            return
        if len(self.branches) < 2:
            raise InvalidMapError("an IFS needs at least two maps")
        lo, hi = self.domain_lo, self.domain_hi
        for i, br in enumerate(self.branches, 1):
            if not br.lipschitz < 1:
                raise InvalidMapError(f"map {i} is not a contraction")
            if math.isinf(lo) or math.isinf(hi):
                continue
            for v in (br(lo), br(hi)):
                if not lo < v < hi:
                    raise InvalidMapError(f"map {i} sends an endpoint to {fmt(v)}, outside the open domain")

    @property
    def n(self) -> int:
        return len(self.branches)

    @property
    def is_real_line(self) -> bool:
        return self.domain_lo == NEG_INF and self.domain_hi == INF

    def with_breakpoints(self, breakpoints, **kw) -> PiecewiseContraction:
        return PiecewiseContraction(self.domain_lo, self.domain_hi, tuple(breakpoints), self.branches, **kw)


def highly_contractive_check(ifs: IFSSpec):
    """``(passes, rho)`` with rho the supremum of the summed derivative magnitudes."""
    if all(isinstance(b, AffineBranch) for b in ifs.branches):
        rho = sum((abs(b.slope) for b in ifs.branches), Fraction(0))
        return rho < 1, rho
    lo, hi = ifs.domain_lo, ifs.domain_hi
    if math.isinf(lo) or math.isinf(hi):
        raise UnsupportedError("non-affine check needs a bounded domain")
    pieces = [_derivative_pieces(b, lo, hi) for b in ifs.branches]
    knots = sorted({lo, hi} | {e for ps in pieces for a, b, _ in ps for e in (a, b)})
    rho = Fraction(0)
    for a, b in zip(knots, knots[1:]):
        mid = (a + b) / 2
        total = sum((d for ps in pieces for pa, pb, d in ps if pa <= mid <= pb), Fraction(0))
        rho = max(rho, total)
    return rho < 1, rho


@dataclass(frozen=True)
class ClampResult:
    ifs: IFSSpec
    margin: Fraction
    neighborhood: tuple

    def contains(self, ys) -> bool:
        """Whether the breakpoint tuple ``ys`` lies in the neighbourhood."""
        ys = [to_scalar(y) for y in ys]
        return len(ys) == len(self.neighborhood) and all(a < y < b for y, (a, b) in zip(ys, self.neighborhood)) \
            and all(u < v for u, v in zip(ys, ys[1:]))


def clamp_construction(ifs: IFSSpec, breakpoints) -> ClampResult:
    """Freeze each map outside a window around its cell.

    The margin is a third of the smallest cell length; map ``i`` is kept on
    ``[x_{i-1} - margin, x_i + margin]`` (unbounded on the outer sides of the
    first and last maps) and constant beyond.
    """
    xs = [to_scalar(x) for x in breakpoints]
    if len(xs) != ifs.n - 1:
        raise InvalidMapError(f"{ifs.n} maps need {ifs.n - 1} breakpoints")
    ends = [ifs.domain_lo] + xs + [ifs.domain_hi]
    if any(not a < b for a, b in zip(ends, ends[1:])):
        raise InvalidMapError("breakpoints must be strictly increasing inside the domain")
    margin = min(b - a for a, b in zip(ends, ends[1:])) / 3
    n = ifs.n
    clamped = []
    for i, br in enumerate(ifs.branches, 1):
        lo_knot = NEG_INF if i == 1 else ends[i - 1] - margin
        hi_knot = INF if i == n else ends[i] + margin
        clamped.append(ClampedBranch(br, lo_knot, hi_knot))
    hood = tuple((x - margin, x + margin) for x in xs)
    return ClampResult(IFSSpec(tuple(clamped), ifs.domain_lo, ifs.domain_hi), margin, hood)


def compose_enumerate(ifs: IFSSpec, k: int, cap: int = 10**6):
    """All ``n**k`` compositions of ``k`` maps as ``(word, AffineBranch)``; ``word[0]`` is applied first."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if ifs.n ** k > cap:
        raise BudgetError(f"{ifs.n}^{k} compositions exceed the cap {cap}")
    if not all(isinstance(b, AffineBranch) for b in ifs.branches):
        raise UnsupportedError("composition enumeration needs affine maps")
    out = []
    for word in product(range(1, ifs.n + 1), repeat=k):
        h = IDENTITY
        for i in word:
            h = h.then(ifs.branches[i - 1])
        out.append((word, h))
    return out


def real_line_radius(ifs: IFSSpec) -> Fraction:
    """``2 c / (1 - rho)`` with ``c = max |phi_i(0)|`` and rho the largest Lipschitz constant."""
    rho = max(b.lipschitz for b in ifs.branches)
    if not rho < 1:
        raise InvalidMapError("maps must be contractions")
    c = max(abs(to_scalar(b(0))) for b in ifs.branches)
    return 2 * c / (1 - rho)


def radius_holds(ifs: IFSSpec, r) -> bool:
    """Every map sends ``[-r, r]`` strictly inside ``(-r, r)`` (endpoint check, monotone maps)."""
    r = to_scalar(r)
    return all(-r < v < r for b in ifs.branches for v in (b(-r), b(r)))


def escape_steps(x, rho, r) -> int:
    """Smallest ``k >= 0`` with ``rho**k * |x| < r/2``."""
    x, rho, r = abs(to_scalar(x)), to_scalar(rho), to_scalar(r)
    if not 0 <= rho < 1 or r <= 0:
        raise ValueError("need 0 <= rho < 1 and r > 0")
    k, v = 0, x
    while not v < r / 2:
        k += 1
        v *= rho
    return k


def trim_real_line(pc: PiecewiseContraction, k: int | None = None) -> PiecewiseContraction:
    """Restrict a real-line map to ``[-(r0 + k), r0 + k)``.

    Without ``k`` the smallest integer is chosen that puts every breakpoint
    strictly inside the window.
    """
    if not pc.is_real_line:
        raise UnsupportedError("trim_real_line expects a real-line map")
    r0 = real_line_radius(IFSSpec(pc.branches, NEG_INF, INF, validate=False))
    if k is None:
        k = 0
        while not (r0 + k > 0 and all(-(r0 + k) < x < r0 + k for x in pc.breakpoints)):
            k += 1
    R = r0 + k
    return PiecewiseContraction(-R, R, pc.breakpoints, pc.branches, pc.right_closed)


def ifs_from_json(doc: dict) -> IFSSpec:
    """IFS in the map-definition schema; ``breakpoints`` is ignored."""
    try:
        domain = doc.get("domain", ["0", "1"])
        intercepts = list(doc["intercepts"])
        slope = doc["slope"]
        slopes = list(slope) if isinstance(slope, list) else [slope] * len(intercepts)
        if any(isinstance(v, float) for v in slopes + intercepts + list(domain)):
            raise InvalidMapError("rationals must be given as strings 'p/q'")
        branches = tuple(AffineBranch(to_scalar(s), to_scalar(b)) for s, b in zip(slopes, intercepts, strict=True))
        return IFSSpec(branches, parse_bound(domain[0]), parse_bound(domain[1]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidMapError):
            raise
        raise InvalidMapError(f"malformed IFS definition: {exc}") from exc
