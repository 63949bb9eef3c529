import io
import json
import math

import numpy
import pytest

from rootpair.clumps import (Clump, ClumpSet, UnionFind, build, clump_radius, count_report,
                             eligibility_floor)
from rootpair.critical import solve
from rootpair.measures import UniformDisk
from rootpair.polynomial import RootSet


def test_radius_floor_branch_at_zero_of_m():
    for n in (8, 100, 10 ** 6):
        r = clump_radius(UniformDisk(), 0.0, n)
        assert r == pytest.approx(1 / (math.sqrt(n) * math.log(n)), rel=1e-14)


def test_radius_uses_m_when_large_enough():
    # at n = e^10 the floor is 1e4 / e^5 ~ 67, so 0.9 would not win; check the branch
    # logic directly with a huge n where the floor is below 0.9
    n = 10 ** 16
    assert eligibility_floor(n) < 0.9
    assert clump_radius(UniformDisk(), 0.9, n) == pytest.approx(math.log(n) ** 3 / (n * 0.9))


def test_radius_example_value():
    L = math.log(1000)
    floor = L ** 4 / math.sqrt(1000)
    assert floor == pytest.approx(72.1, abs=0.1)
    expected = L ** 3 / (1000 * floor)
    assert clump_radius(UniformDisk(), 0.5, 1000) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(4.58e-3, abs=2e-5)


def test_radius_needs_n_at_least_8():
    with pytest.raises(ValueError):
        clump_radius(UniformDisk(), 0.5, 7)


def test_union_find():
    uf = UnionFind(5)
    uf.union(3, 1)
    uf.union(4, 3)
    assert uf.groups() == [[0], [1, 3, 4], [2]]
    assert not uf.union(1, 4)


def test_far_roots_are_singletons():
    roots = RootSet(numpy.arange(10) * 10.0)
    cs = build(roots, [], UniformDisk())
    assert len(cs) == 10
    assert cs.unassigned_cps == ()


def test_ten_zeros_and_one_clump():
    roots = RootSet([0] * 10 + [1])
    cps = solve(roots)
    measure = UniformDisk()
    r1 = clump_radius(measure, 1.0, 11)
    assert 1 / 11 < r1 < 0.13
    cs = build(roots, cps, measure)
    one = [c for c in cs.components if 10 in c.root_indices][0]
    assert one.root_indices == (10,)
    assert [cps.points[k] for k in one.cp_indices] == [pytest.approx(10 / 11)]
    zeros = [c for c in cs.components if 0 in c.root_indices][0]
    # the deficit sits at the zero of m: ten roots, nine critical points
    assert (len(zeros.root_indices), len(zeros.cp_indices)) == (10, 9)
    assert count_report(cs).clumps[cs.components.index(one)].matched


@pytest.mark.parametrize("seed", range(3))
def test_partition_invariants(seed):
    n = 500
    roots = UniformDisk().sample(n, seed)
    cps = solve(roots)
    cs = build(roots, cps, UniformDisk())
    members = sorted(i for c in cs.components for i in c.root_indices)
    assert members == list(range(n))
    owned = [k for c in cs.components for k in c.cp_indices]
    assert len(owned) == len(set(owned))
    assert len(owned) + len(cs.unassigned_cps) == n - 1
    for c in cs.components:
        assert c.diameter <= sum(2 * r for r in c.radii) + 1e-12


def test_membership_ignores_order(rng):
    roots = UniformDisk().sample(300, 4)
    cps = solve(roots)
    perm = rng.permutation(300)
    a = build(roots, cps, UniformDisk())
    b = build(RootSet(roots.points[perm]), cps, UniformDisk())
    relabel = {int(new): int(old) for new, old in enumerate(perm)}
    sa = sorted(tuple(sorted(c.root_indices)) for c in a.components)
    sb = sorted(tuple(sorted(relabel[i] for i in c.root_indices)) for c in b.components)
    assert sa == sb


@pytest.mark.parametrize("seed", range(4))
def test_doubling_radii_never_adds_clumps(seed):
    roots = UniformDisk().sample(400, seed)
    counts = [len(build(roots, [], UniformDisk(), radius_scale=s)) for s in (1, 2, 4, 8)]
    assert counts == sorted(counts, reverse=True)


def test_deterministic_root_far_away_owns_its_critical_point():
    # (z - Y)^k (z - xi): the xi clump holds exactly the point (k xi + Y)/(k + 1)
    for k in (20, 60, 200):
        roots = RootSet([0] * k + [1])
        cps = solve(roots)
        cs = build(roots, cps, UniformDisk(0, 0.01))
        comp = [c for c in cs.components if k in c.root_indices][0]
        assert comp.root_indices == (k,)
        assert [cps.points[j] for j in comp.cp_indices] == [pytest.approx(k / (k + 1))]


def test_count_report_examples():
    singles = ClumpSet(tuple(Clump((i,), (i,), (0.1,), True, 0.2) for i in range(4)), ())
    assert count_report(singles).matched_fraction == 1.0
    empty = ClumpSet(tuple(Clump((i,), (), (0.1,), True, 0.2) for i in range(4)), (0, 1, 2))
    rep = count_report(empty)
    assert rep.matched_fraction == 0.0
    assert rep.flagged == (0, 1, 2, 3)


def test_count_report_with_no_eligible_clumps_is_nan():
    cs = ClumpSet((Clump((0,), (), (0.1,), False, 0.2),), ())
    assert math.isnan(count_report(cs).matched_fraction)


def test_count_report_jsonl():
    roots = UniformDisk().sample(100, 1)
    cs = build(roots, solve(roots), UniformDisk(), threshold=0.3)
    rep = count_report(cs)
    buf = io.StringIO()
    rep.to_jsonl(buf)
    lines = buf.getvalue().splitlines()
    assert len(lines) == len(cs)
    rec = json.loads(lines[0])
    assert set(rec) == {"clump", "roots", "cps", "matched", "eligible", "flagged", "diameter"}


def test_deficit_clumps_are_flagged_or_ineligible():
    roots = UniformDisk().sample(500, 7)
    cs = build(roots, solve(roots), UniformDisk(), threshold=0.3)
    rep = count_report(cs)
    for k, row in enumerate(rep.clumps):
        if not row.matched:
            assert (not row.eligible) or k in rep.flagged
