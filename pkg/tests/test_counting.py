from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pwc.counting import (
    BoundaryIntervalTable,
    boundary_intervals,
    check_witness,
    equivalence_classes,
    ordering_witness,
    reaches_boundary,
    verify_orbit_bound,
)
from pwc.errors import InconsistencyError, NonGenericError, TheoremViolation
from pwc.maps import ModOneFamily, bad_delta_check, piecewise, reduce_mod_one
from pwc.orbits import PeriodicOrbitCert
from pwc.partition import QuasiPartition, backward_closure, build_quasi_partition, extract_periodic_orbits


def analyse(pc):
    cl = backward_closure(pc)
    qp = build_quasi_partition(pc, cl)
    table = boundary_intervals(qp, pc.breakpoints)
    return cl, qp, table, equivalence_classes(qp, table)


def naive_classes(qp, members, horizon):
    """Oracle: relation by explicit forward reachable sets, then transitive closure by repeated merging."""
    reach = {}
    for c in members:
        seen, l = set(), c
        for _ in range(horizon + 1):
            seen.add(l)
            l = qp.tau[l - 1]
        reach[c] = seen & set(members)
    groups = [{c} for c in members]
    merged = True
    while merged:
        merged = False
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                if any(reach[a] & reach[b] for a in groups[i] for b in groups[j]):
                    groups[i] |= groups.pop(j)
                    merged = True
                    break
            if merged:
                break
    return sorted(tuple(sorted(g)) for g in groups)


class TestBoundaryIntervals:
    def test_two_branch(self, two):
        _, qp, table, _ = analyse(two)
        assert qp.interval(table.F[0]) == (F(0), F(1, 2))
        assert qp.interval(table.G[0]) == (F(1, 2), F(1))
        assert len(table.members) == 2

    def test_left_preimage(self):
        pc = piecewise(["1/2"], ["9/20", "1/2"], slope="1/4")
        cl, qp, table, _ = analyse(pc)
        assert cl.points == (F(1, 5), F(1, 2))
        assert qp.interval(table.F[0]) == (F(1, 5), F(1, 2))
        assert table.F0 == 1 and table.Gn == qp.m

    def test_minimal(self, funnel_map):
        _, qp, table, _ = analyse(funnel_map)
        assert qp.m == 2 and table.members == (1, 2)

    def test_shared_member_has_two_tags(self):
        pc = piecewise(["1/3", "2/3"], ["1/2", "1/2", "1/2"], slope="1/10")
        _, qp, table, _ = analyse(pc)
        assert table.G[0] == table.F[1]
        assert table.tags(table.G[0]) == [("F", 2), ("G", 1)]
        assert len(table.members) == 3

    def test_missing_breakpoint(self, funnel_map):
        qp = QuasiPartition((F(0), F(1)), (1,), (1,), ())
        with pytest.raises(InconsistencyError):
            boundary_intervals(qp, funnel_map.breakpoints)


class TestEquivalence:
    def test_two_branch(self, two):
        *_, classes = analyse(two)
        assert classes.count == 2

    def test_funnel(self, funnel_map):
        _, qp, table, classes = analyse(funnel_map)
        assert classes.count == 1
        (w,) = classes.witnesses
        assert w.meet == 2 and {w.steps_first, w.steps_second} == {0, 1}
        assert check_witness(qp, w, table.members)

    def test_single_member(self, funnel_map):
        _, qp, _, _ = analyse(funnel_map)
        table = BoundaryIntervalTable((2,), (2,), 1, 2)
        assert equivalence_classes(qp, table).count == 1

    def test_small_horizon_only_under_merges(self, funnel_map):
        _, qp, table, _ = analyse(funnel_map)
        assert equivalence_classes(qp, table, horizon=1).count == 1
        with pytest.raises(ValueError):
            equivalence_classes(qp, table, horizon=0)

    @pytest.mark.parametrize("delta", ["14/25", "1/7", "3/11", "5/13"])
    def test_matches_naive_oracle(self, fixture_a, delta):
        pc = reduce_mod_one(ModOneFamily(fixture_a, F(delta)))
        cl = backward_closure(pc)
        if not cl.finite:
            pytest.skip("closure budget exhausted")
        qp = build_quasi_partition(pc, cl)
        table = boundary_intervals(qp, pc.breakpoints)
        classes = equivalence_classes(qp, table)
        assert [tuple(c) for c in classes.classes] == naive_classes(qp, table.members, qp.m)
        assert all(check_witness(qp, w, table.members) for w in classes.witnesses)


class TestOrbitBound:
    def test_sharpness_example(self, two):
        _, qp, _, classes = analyse(two)
        orbits = extract_periodic_orbits(two, qp)
        rep = verify_orbit_bound(two, orbits, classes, mod_one=True, n_base=1)
        assert (rep.num_orbits, rep.class_count) == (2, 2)
        assert rep.num_orbits <= 2 * rep.n_base
        assert sorted(rep.injection) == [0, 1]

    def test_funnel(self, funnel_map):
        _, qp, _, classes = analyse(funnel_map)
        orbits = extract_periodic_orbits(funnel_map, qp)
        rep = verify_orbit_bound(funnel_map, orbits, classes)
        assert rep.num_orbits == 1 <= rep.class_count == 1 <= rep.n == 2

    def test_violation_raises(self, funnel_map):
        _, qp, _, classes = analyse(funnel_map)
        orbits = extract_periodic_orbits(funnel_map, qp)
        fake = orbits + [PeriodicOrbitCert((F(1, 10),), 1, (1,), (1,))]
        with pytest.raises(TheoremViolation):
            verify_orbit_bound(funnel_map, fake, classes)

    def test_mod_one_needs_base_count(self, two):
        _, qp, _, classes = analyse(two)
        with pytest.raises(ValueError):
            verify_orbit_bound(two, extract_periodic_orbits(two, qp), classes, mod_one=True)

    def test_report_json(self, two):
        _, qp, _, classes = analyse(two)
        doc = verify_orbit_bound(two, extract_periodic_orbits(two, qp), classes).to_json()
        assert doc["num_orbits"] == 2 and doc["hypotheses_met"] is True


@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_counting_properties(data):
    n = data.draw(st.integers(2, 4))
    lam = data.draw(st.sampled_from([F(1, 2), F(1, 3), F(-1, 2), F(2, 5)]))
    cuts = sorted(data.draw(st.sets(st.fractions(F(1, 50), F(49, 50), max_denominator=97),
                                    min_size=n - 1, max_size=n - 1)))
    b = [data.draw(st.fractions(-1, 1, max_denominator=97)) for _ in range(n)]
    fam = ModOneFamily(piecewise(cuts, b, slope=lam, validate_images=False),
                       data.draw(st.fractions(0, 1, max_denominator=89)))
    if bad_delta_check(fam):
        return
    pc = reduce_mod_one(fam)
    cl = backward_closure(pc, max_points=2000, max_depth=400)
    if not cl.finite:
        return
    qp = build_quasi_partition(pc, cl)
    table = boundary_intervals(qp, pc.breakpoints)
    classes = equivalence_classes(qp, table)
    if cl.disjoint:
        assert classes.count <= pc.n
    steps = reaches_boundary(qp, table)
    assert all(s is not None and s <= qp.m for s in steps.values())
    try:
        orbits = extract_periodic_orbits(pc, qp)
    except NonGenericError:
        return
    rep = verify_orbit_bound(pc, orbits, classes, mod_one=True, n_base=n, closure=cl)
    if rep.hypotheses_met:
        assert rep.num_orbits <= rep.class_count <= pc.n
        assert rep.num_orbits <= 2 * n
        members = set(table.members)
        for o in orbits:
            assert len({classes.class_of(l) for l in o.interval_cycle if l in members}) == 1
        perm, pairs = ordering_witness(qp, cl)
        assert sorted(perm) == list(range(1, pc.n))
        assert len(pairs) == pc.n - 2
