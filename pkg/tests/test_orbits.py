from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pwc.errors import NotAContractionError
from pwc.maps import AffineBranch, ModOneFamily, piecewise, reduce_mod_one
from pwc.orbits import (
    CycleReport,
    Inconclusive,
    PeriodicOrbitCert,
    certify_word,
    compose,
    detect_cycle,
    fixed_point_of_composition,
    iterate_with_itinerary,
    omega_limit,
)

from conftest import fixture_a_base, two_branch


def hand_iterate(pc, x, k):
    """Oracle: walk cells by direct comparison against the breakpoint list."""
    pts, digits = [x], []
    for _ in range(k):
        ends = pc.cell_ends
        i = next(j for j in range(1, pc.n + 1) if pc.cell_contains(j, x))
        assert ends[i - 1] <= x <= ends[i]
        digits.append(i)
        br = pc.branches[i - 1]
        x = br.slope * x + br.intercept
        pts.append(x)
    return pts, digits


class TestIterate:
    def test_fixed_point_trace(self, two):
        t = iterate_with_itinerary(two, F(1, 6), 3)
        assert t.points == (F(1, 6),) * 4
        assert t.digits == (1, 1, 1, 1)

    def test_hand_iteration(self, two):
        t = iterate_with_itinerary(two, F(1, 5), 2)
        assert t.points == (F(1, 5), F(3, 20), F(7, 40))
        assert t.digits[:3] == (1, 1, 1)

    def test_zero_steps(self, two):
        t = iterate_with_itinerary(two, F(9, 10), 0)
        assert t.points == (F(9, 10),) and t.digits == (2,)

    def test_float_mode_is_flagged(self, two):
        t = iterate_with_itinerary(two, F(1, 5), 5, exact=False)
        assert t.exact is False
        assert all(isinstance(p, float) for p in t.points)
        assert t.to_json()["exact"] is False

    def test_matches_oracle_on_fixture_a(self, fixture_a):
        pts, digits = hand_iterate(fixture_a, F(0), 12)
        t = iterate_with_itinerary(fixture_a, F(0), 12)
        assert list(t.points) == pts
        assert list(t.digits[:12]) == digits

    @settings(max_examples=50, deadline=None)
    @given(x=st.fractions(0, 1, max_denominator=1000).filter(lambda q: q < 1),
           y=st.fractions(0, 1, max_denominator=1000).filter(lambda q: q < 1),
           k=st.integers(1, 12))
    def test_telescoping(self, x, y, k):
        pc = fixture_a_base()
        tx = iterate_with_itinerary(pc, x, k)
        ty = iterate_with_itinerary(pc, y, k)
        if tx.digits[:k] == ty.digits[:k]:
            lam = F(1)
            for d in tx.digits[:k]:
                lam *= pc.branches[d - 1].slope
            assert abs(tx.points[k] - ty.points[k]) == abs(lam) * abs(x - y)


class TestFixedPoint:
    def test_branch_one(self):
        assert fixed_point_of_composition([AffineBranch(F(-1, 2), F(1, 4))]) == F(1, 6)

    def test_branch_two(self):
        assert fixed_point_of_composition([AffineBranch(F(-1, 2), F(5, 4))]) == F(5, 6)

    def test_constant(self):
        assert fixed_point_of_composition([AffineBranch(F(0), F(3, 7))]) == F(3, 7)

    def test_not_a_contraction(self):
        with pytest.raises(NotAContractionError):
            fixed_point_of_composition([AffineBranch(F(1), F(1, 4))])

    def test_empty_word(self):
        with pytest.raises(ValueError):
            fixed_point_of_composition([])

    def test_composition_order(self):
        a, b = AffineBranch(F(1, 2), F(0)), AffineBranch(F(1, 3), F(1))
        h = compose([a, b])
        assert h(F(6)) == b(a(F(6)))
        z = fixed_point_of_composition([a, b])
        assert b(a(z)) == z


class TestDetectCycle:
    def test_left_fixed_point(self, two):
        rep = detect_cycle(two, F(1, 5))
        assert isinstance(rep, CycleReport) and rep.certified
        assert rep.preperiod <= 40 and rep.period == 1
        assert rep.cycle_points == (F(1, 6),)

    def test_right_fixed_point(self, two):
        rep = detect_cycle(two, F(9, 10))
        assert rep.certified and rep.period == 1 and rep.cycle_points == (F(5, 6),)

    def test_already_periodic(self, two):
        rep = detect_cycle(two, F(1, 6))
        assert rep.certified and rep.preperiod == 0 and rep.period == 1

    def test_exact_mode_agrees(self, two):
        a = detect_cycle(two, F(1, 5), exact=True)
        b = detect_cycle(two, F(1, 5))
        assert a.cycle_points == b.cycle_points and a.certified and b.certified

    def test_bit_cap_falls_back(self, fixture_a):
        pc = reduce_mod_one(ModOneFamily(fixture_a, F(2, 9)))
        rep = detect_cycle(pc, F(0), exact=True, bit_cap=64)
        assert rep.certified and rep.cycle_points == (F(1, 45), F(17, 30))

    def test_budget_exhausted(self, fixture_a):
        pc = reduce_mod_one(ModOneFamily(fixture_a, F(2, 9)))
        rep = detect_cycle(pc, F(0), budget=3)
        assert isinstance(rep, Inconclusive) and rep.steps >= 3 and rep.tail

    def test_breakpoint_adjacent_cycle_not_certified(self):
        # x/2 + 1/4 has fixed point 1/2, which is the breakpoint itself
        pc = piecewise(["1/2"], ["1/4", "1/4"], slope="1/2")
        rep = detect_cycle(pc, F(1, 10))
        assert isinstance(rep, CycleReport) and not rep.certified and rep.reason

    def test_bad_budget(self, two):
        with pytest.raises(ValueError):
            detect_cycle(two, F(1, 5), budget=0)

    def test_period_two_minimal(self, fixture_a):
        pc = reduce_mod_one(ModOneFamily(fixture_a, F(2, 9)))
        rep = detect_cycle(pc, F(0))
        assert rep.certified and rep.period == 2 and rep.branch_word == (1, 3)

    def test_cycle_through_breakpoint_is_reported(self, fixture_a):
        # at this shift 9/10 -> 29/90 -> 9/10, a cycle sitting on a breakpoint
        pc = reduce_mod_one(ModOneFamily(fixture_a, F(2, 9)))
        assert pc(pc(F(9, 10))) == F(9, 10)
        rep = detect_cycle(pc, F(1, 2))
        assert not rep.certified and "boundary" in rep.reason

    def test_certify_word_reduces_to_minimal_period(self, two):
        points, word = certify_word(two, [1, 1, 1])
        assert points == (F(1, 6),) and word == (1,)


class TestOmegaLimit:
    def test_two_branch_left(self, two):
        assert omega_limit(two, F(1, 5)) == PeriodicOrbitCert((F(1, 6),), 1, (1,))

    def test_two_branch_right(self, two):
        assert omega_limit(two, F(9, 10)) == PeriodicOrbitCert((F(5, 6),), 1, (2,))

    def test_fixture_a_golden(self, fixture_a):
        # frozen after checking against forward iteration and exact closure below
        pc = reduce_mod_one(ModOneFamily(fixture_a, F(2, 9)))
        lim = omega_limit(pc, F(0))
        assert lim == PeriodicOrbitCert((F(1, 45), F(17, 30)), 2, (1, 3))

    def test_fixture_a_golden_oracle(self, fixture_a):
        pc = reduce_mod_one(ModOneFamily(fixture_a, F(2, 9)))
        b1, b3 = pc.branches[0], pc.branches[2]
        z = F(1, 45)
        assert b3(b1(z)) == z and b1(z) == F(17, 30)
        pts, _ = hand_iterate(pc, F(0), 60)
        assert abs(pts[-1] - z) < F(1, 10**15) or abs(pts[-1] - F(17, 30)) < F(1, 10**15)

    def test_not_certified_is_inconclusive(self):
        pc = piecewise(["1/2"], ["1/4", "1/4"], slope="1/2")
        assert isinstance(omega_limit(pc, F(1, 10)), Inconclusive)


@settings(max_examples=40, deadline=None)
@given(x=st.fractions(0, 1, max_denominator=997).filter(lambda q: q < 1))
def test_certified_cycles_are_exact_and_shift_invariant(x):
    pc = reduce_mod_one(ModOneFamily(fixture_a_base(), F(14, 25)))
    rep = detect_cycle(pc, x)
    if not isinstance(rep, CycleReport) or not rep.certified:
        return
    z = rep.cycle_points[0]
    for j, d in enumerate(rep.branch_word):
        assert rep.cycle_points[j] == z
        assert z not in pc.breakpoints and z != pc.domain_lo
        z, i = pc.eval(z)
        assert i == d
    assert z == rep.cycle_points[0]
    nxt = detect_cycle(pc, pc(x))
    if isinstance(nxt, CycleReport) and nxt.certified:
        assert set(nxt.cycle_points) == set(rep.cycle_points)


@settings(max_examples=30, deadline=None)
@given(x=st.fractions(0, 1, max_denominator=997).filter(lambda q: q < 1))
def test_itinerary_eventually_periodic(x):
    pc = two_branch()
    rep = detect_cycle(pc, x)
    assert rep.certified
    s, p = rep.preperiod, rep.period
    t = iterate_with_itinerary(pc, x, s + 4 * p + 2 * p)
    tail = t.digits[s:]
    assert all(tail[k] == tail[k + p] for k in range(len(tail) - p))
