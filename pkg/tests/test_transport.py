import itertools
import math

import numpy
import pytest

from rootpair.critical import solve
from rootpair.errors import SizeError
from rootpair.measures import UniformDisk
from rootpair.polynomial import RootSet
from rootpair.transport import augment, greedy_pair, scaling_record, wasserstein1


def brute_force_w1(a, b):
    n = len(a)
    return min(sum(abs(a[i] - b[p[i]]) for i in range(n)) for p in itertools.permutations(range(n))) / n


def cloud(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def test_augment_examples():
    assert numpy.array_equal(augment([0.5], RootSet([0, 1])), [0.5, 0.5])
    roots = RootSet([0] * 10 + [1])
    aug = augment(solve(roots), roots)
    assert aug.size == 11
    assert aug[-1] == pytest.approx(1 / 11)


def test_w1_identical_sets_is_zero(rng):
    a = cloud(rng, 30)
    rep = wasserstein1(a, rng.permutation(a))
    assert rep.w1 == 0


def test_w1_two_points():
    rep = wasserstein1([0, 1], [0, 2])
    assert rep.w1 == 0.5
    assert list(rep.assignment) == [0, 1]


@pytest.mark.parametrize("seed", range(6))
def test_w1_matches_permutation_oracle(seed):
    rng = numpy.random.default_rng(seed)
    a, b = cloud(rng, 6), cloud(rng, 6)
    assert wasserstein1(a, b).w1 == pytest.approx(brute_force_w1(a, b), abs=1e-12)


def test_report_invariants(rng):
    a, b = cloud(rng, 40), cloud(rng, 40)
    rep = wasserstein1(a, b)
    assert sorted(rep.assignment) == list(range(40))
    assert rep.w1 == pytest.approx(rep.distances.sum() / 40, rel=1e-14)
    g = greedy_pair(a, b)
    assert sorted(g.assignment) == list(range(40))
    assert rep.w1 <= g.w1 + 1e-15


def test_size_checks(rng):
    with pytest.raises(ValueError):
        wasserstein1([0, 1], [0])
    with pytest.raises(SizeError):
        wasserstein1(numpy.zeros(5001), numpy.zeros(5001))


def test_greedy_tie_break_is_deterministic():
    # every pair is equally far: lowest indices first
    rep = greedy_pair([0, 0], [1, 1])
    assert list(rep.assignment) == [0, 1]
    assert greedy_pair([0, 1j], [0, 1j]).total_cost == 0


def test_greedy_within_twice_exact():
    ratios = []
    for seed in range(20):
        roots = UniformDisk().sample(300, seed)
        target = augment(solve(roots), roots)
        ratios.append(greedy_pair(roots, target).w1 / wasserstein1(roots, target).w1)
    assert min(ratios) >= 1 - 1e-12
    assert max(ratios) <= 2


def test_triangle_inequality(rng):
    for _ in range(10):
        a, b, c = cloud(rng, 50), cloud(rng, 50), cloud(rng, 50)
        assert wasserstein1(a, c).w1 <= wasserstein1(a, b).w1 + wasserstein1(b, c).w1 + 1e-10


def test_permutation_invariance(rng):
    a, b = cloud(rng, 60), cloud(rng, 60)
    base = wasserstein1(a, b).w1
    assert wasserstein1(rng.permutation(a), b).w1 == pytest.approx(base, abs=1e-12)
    assert wasserstein1(a, rng.permutation(b)).w1 == pytest.approx(base, abs=1e-12)


def test_mean_augmentation_band():
    # moving one atom to the root mean costs at most 2 eta / n in W1
    roots = UniformDisk().sample(200, 5)
    cps = solve(roots)
    aug = augment(cps, roots)
    dup = numpy.concatenate([cps.points, cps.points[:1]])
    w_aug = wasserstein1(roots, aug).w1
    w_dup = wasserstein1(roots, dup).w1
    assert abs(w_aug - w_dup) <= 2 * roots.eta / roots.n + 1e-12


def test_scaling_record_decreasing_and_reproducible():
    rows, med = scaling_record(UniformDisk(), [100, 400], range(6))
    assert len(rows) == 12
    assert med[400][0] < med[100][0]
    again, _ = scaling_record(UniformDisk(), [100], [3])
    first = [r for r in rows if r.n == 100 and r.seed == 3][0]
    assert again[0] == first
    for r in rows:
        assert r.normalized == pytest.approx(r.n * r.w1 / (r.eta * math.log(r.n) ** 9))


def test_scaling_record_needs_n_at_least_8():
    with pytest.raises(ValueError):
        scaling_record(UniformDisk(), [4], [0])
