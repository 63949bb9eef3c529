import math

import numpy
import pytest
from scipy import integrate

from rootpair.critical import solve
from rootpair.errors import ConditioningError, InsufficientDataError, UnsupportedMeasureError
from rootpair.measures import Empirical, TwoDisks, UniformDisk, UnitCircle
from rootpair.polynomial import RootSet
from rootpair.statistics import (CovTarget, CubicBump, FluctuationSample, companion_trace_residual,
                                 cov_target, covariance_check, fluct_sample, heavy_tail_variance,
                                 linear_statistic_gap, mc_log_potential)


# --- test function ------------------------------------------------------------

def test_bump_value_and_support():
    phi = CubicBump(0.5, 0.25, 2.0)
    assert phi(0.5) == 2.0
    assert phi(0.75) == 0
    assert phi(5) == 0
    assert phi(0.5 + 0.125j) == pytest.approx(2.0 * 0.75 ** 3)


@pytest.mark.parametrize("direction", [1, 1j, numpy.exp(0.7j)])
def test_bump_is_c2_across_the_edge(direction):
    phi = CubicBump(0.1j, 0.5, 1.3)
    edge = 0.1j + 0.5 * direction
    h = 1e-5
    for z in (edge - 2 * h * direction, edge, edge + 2 * h * direction):
        # finite-difference gradient and Laplacian match the closed forms
        gx = (phi(z + h) - phi(z - h)) / (2 * h)
        gy = (phi(z + 1j * h) - phi(z - 1j * h)) / (2 * h)
        assert abs(complex(gx, gy) - phi.gradient(z)) < 1e-6
        lap = (phi(z + h) + phi(z - h) + phi(z + 1j * h) + phi(z - 1j * h) - 4 * phi(z)) / h ** 2
        # the third derivative jumps at the edge, so the stencil is only O(h) there
        assert abs(lap - phi.laplacian(z)) < 2e-3
    assert phi.gradient(edge) == pytest.approx(0, abs=1e-15)
    assert phi.laplacian(edge) == pytest.approx(0, abs=1e-15)


def test_bump_laplacian_closed_form():
    phi = CubicBump(0, 2.0, 3.0)
    for t in (0.0, 0.2, 0.6, 0.95):
        z = 2.0 * math.sqrt(t)
        expected = 3.0 * (-12 * (1 - t) ** 2 + 24 * t * (1 - t)) / 4.0
        assert phi.laplacian(z) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("radius,amp", [(0.3, 1.0), (1.7, -2.5)])
def test_bump_l1_laplacian(radius, amp):
    phi = CubicBump(0.2, radius, amp)
    numeric = integrate.quad(lambda r: 2 * math.pi * r * abs(phi.laplacian(0.2 + r)), 0, radius,
                             points=[radius / math.sqrt(3)], epsabs=1e-12)[0]
    assert phi.l1_laplacian() == pytest.approx(numeric, rel=1e-9)
    assert phi.l1_laplacian() == pytest.approx(32 * math.pi * abs(amp) / 9)


# --- fluctuations ---------------------------------------------------------------

def test_fluct_sample_degenerate_point_mass():
    s = fluct_sample(Empirical([0]), 1.0, 10, 0, "inside")
    assert abs(s.value) < 1e-12
    assert s.w == pytest.approx(10 / 11, abs=1e-15)
    assert not s.flagged


def test_fluct_sample_rejects_bad_input():
    with pytest.raises(ValueError):
        fluct_sample(UniformDisk(), 0.0, 100, 0, "inside")
    with pytest.raises(ValueError):
        fluct_sample(UniformDisk(), 0.5, 100, 0, "sideways")


def test_fluct_sample_local_equals_full():
    a = fluct_sample(UniformDisk(), 0.5, 2000, 3, "inside", method="full")
    b = fluct_sample(UniformDisk(), 0.5, 2000, 3, "inside", method="local")
    assert abs(a.w - b.w) < 1e-13


def test_fluct_sample_flags_far_critical_point():
    # xi outside the disk with very few roots: the bound 3/(|m| n) is tiny relative to the offset
    s = fluct_sample(UniformDisk(), 1.05, 3, 0, "outside")
    assert s.flagged == (s.distance > 3 / (abs(UniformDisk().stieltjes(1.05)) * 3))


def test_inside_fluctuation_is_centred():
    vals = numpy.array([fluct_sample(UniformDisk(), 0.5, 10 ** 4, s, "inside").value
                        for s in range(500)])
    for comp in (vals.real, vals.imag):
        assert abs(comp.mean()) <= 4 * comp.std(ddof=1) / math.sqrt(500)


def test_outside_flag_rate_is_small():
    flags = [fluct_sample(UnitCircle(), 2.0, 2000, s, "outside", method="local").flagged
             for s in range(500)]
    assert numpy.mean(flags) <= 0.01


# --- covariance targets ---------------------------------------------------------

def test_cov_target_inside_closed_forms():
    assert cov_target(UniformDisk(), 0.5, "inside") == CovTarget(0.5, 0.5, 0.0)
    t = cov_target(TwoDisks(), 2.0, "inside")
    assert (t.re_var, t.im_var, t.cross) == pytest.approx((0.25, 0.25, 0.0))
    r = cov_target(UniformDisk(0, 2.0), 0.1, "inside")
    assert r.re_var == pytest.approx(math.pi * (1 / (4 * math.pi)) / 2)


def test_cov_target_inside_needs_density():
    with pytest.raises(UnsupportedMeasureError):
        cov_target(UnitCircle(), 2.0, "inside")


def test_cov_target_outside_unit_circle():
    t = cov_target(UnitCircle(), 2.0, "outside")
    # E|1/(2-X)|^2 = 1/3 for X on the circle and |m(2)|^2 = 1/4
    assert t.trace == pytest.approx(1 / 3 - 1 / 4, abs=5 * (t.stderr[0] + t.stderr[1]))
    assert t.re_var == pytest.approx(t.im_var, rel=0.02)
    assert abs(t.cross) <= 5 * t.stderr[2]
    assert abs(t.cross) <= math.sqrt(t.re_var * t.im_var)


# --- covariance check -----------------------------------------------------------

def test_covariance_check_accepts_target_samples():
    rng = numpy.random.default_rng(2)
    target = CovTarget(0.5, 0.3, 0.1)
    cov = [[0.5, 0.1], [0.1, 0.3]]
    xy = rng.multivariate_normal([0, 0], cov, size=4000)
    rep = covariance_check(xy[:, 0] + 1j * xy[:, 1], target)
    assert rep.within_z and rep.passed
    assert rep.re_var == pytest.approx(0.5, rel=0.1)


def test_covariance_check_rejects_zero_samples():
    rep = covariance_check(numpy.zeros(200, complex), CovTarget(0.5, 0.5, 0.0))
    assert not rep.passed
    rep = covariance_check(numpy.zeros(200, complex), CovTarget(0.5, 0.5, 0.0), var_rtol=0.3)
    assert not rep.passed and not rep.within_tol


def test_covariance_check_needs_enough_samples():
    with pytest.raises(InsufficientDataError):
        covariance_check(numpy.ones(99, complex), CovTarget(1, 1, 0))


def test_covariance_check_drops_flagged_samples():
    rng = numpy.random.default_rng(0)
    good = [FluctuationSample(complex(a, b), "inside") for a, b in rng.normal(size=(150, 2))]
    bad = [FluctuationSample(100.0 + 0j, "inside", flagged=True)] * 10
    rep = covariance_check(good + bad, CovTarget(1, 1, 0))
    assert rep.n_samples == 150


def test_covariance_check_trace_scaling():
    rng = numpy.random.default_rng(1)
    v = rng.normal(size=1000) * 0.2 + 1j * rng.normal(size=1000) * 0.2
    tgt = CovTarget(0.04, 0.04, 0.0)
    assert covariance_check(v, tgt, var_rtol=0.2, scale="trace").passed
    assert not covariance_check(v * 3, tgt, var_rtol=0.2, scale="trace").passed


def test_jackknife_se_matches_normal_theory():
    rng = numpy.random.default_rng(3)
    v = rng.normal(size=5000) + 1j * rng.normal(size=5000)
    rep = covariance_check(v, CovTarget(1, 1, 0))
    # Var of a sample variance of N(0,1) data is about 2/N
    assert rep.se_re == pytest.approx(math.sqrt(2 / 5000), rel=0.1)
    assert rep.se_cross == pytest.approx(math.sqrt(1 / 5000), rel=0.1)


# --- heavy tails --------------------------------------------------------------------

def test_heavy_tail_zero_weight():
    rep = heavy_tail_variance(UniformDisk(), 0.5, 0, 1000, range(5))
    assert rep.raw_re_var == 0 and rep.trunc_im_var == 0 and rep.target == 0


def test_heavy_tail_weight_scaling():
    a = heavy_tail_variance(UniformDisk(), 0.5, 1, 1000, range(20))
    b = heavy_tail_variance(UniformDisk(), 0.5, 2, 1000, range(20))
    assert a.target == pytest.approx(0.5)
    assert b.target == pytest.approx(4 * a.target)
    assert b.raw_re_var == pytest.approx(4 * a.raw_re_var)


def test_heavy_tail_truncation_only_drops_terms():
    rep = heavy_tail_variance(UniformDisk(), 0.5, 1, 2000, range(30), eps=1e6)
    assert numpy.array_equal(rep.raw, rep.truncated)


# --- linear statistics and the log-potential ----------------------------------------

def test_linear_statistic_gap_hand_values():
    phi = CubicBump(0, 1, 1)
    gap, budget = linear_statistic_gap(RootSet([0, 1]), [0.5], phi)
    assert gap == pytest.approx(abs(0.75 ** 3 - 1.0))
    assert budget == pytest.approx(32 * math.pi / 9 * math.log(2))
    assert linear_statistic_gap(RootSet([0, 1]), [0.5], CubicBump(0, 1, 0))[0] == 0


def test_mc_log_potential_single_root():
    est, se = mc_log_potential(CubicBump(0, 1, 1), numpy.array([0j]), 10 ** 6, 0)
    assert abs(est - 1.0) <= 3 * se


def test_mc_log_potential_zero_amplitude():
    assert mc_log_potential(CubicBump(0, 1, 0), RootSet([0, 1]), 1000, 0) == (0.0, 0.0)


def test_mc_log_potential_needs_enough_samples():
    with pytest.raises(ValueError):
        mc_log_potential(CubicBump(0, 1, 1), RootSet([0, 1]), 999, 0)


def test_mc_log_potential_matches_direct_sum():
    phi = CubicBump(0.1, 0.6, 1.0)
    roots = UniformDisk().sample(50, 4)
    est, se = mc_log_potential(phi, roots, 2 * 10 ** 5, 1)
    assert abs(est - phi(roots.points).sum()) <= 3 * se


def test_mc_log_potential_error_decays_like_root_m():
    phi = CubicBump(0.1, 0.6, 1.0)
    roots = UniformDisk().sample(50, 8)
    truth = phi(roots.points).sum()
    ms = [1000, 4000, 16000, 64000]
    rmse = []
    for m in ms:
        errs = [mc_log_potential(phi, roots, m, s)[0] - truth for s in range(50)]
        rmse.append(math.sqrt(numpy.mean(numpy.square(errs))))
    slope = numpy.polyfit(numpy.log(ms), numpy.log(rmse), 1)[0]
    assert -0.65 <= slope <= -0.35


# --- companion trace identity ---------------------------------------------------------

def test_trace_identity_hand_example():
    lhs = 1 / 2.5 + 1 / 3
    rhs = (1 / 3 + 1 / 2) - 0.5 * 0.25 / (1.5 * (1 / 3 + 1 / 2))
    assert lhs == pytest.approx(rhs, abs=1e-15)
    assert companion_trace_residual(RootSet([0, 1]), [0.5], 3) < 1e-14


@pytest.mark.parametrize("k", [1, 4, 30])
def test_trace_identity_exact_family(k):
    Y, xi = 0.3 - 0.2j, 1.4 + 0.5j
    roots = RootSet([Y] * k + [xi])
    cps = [Y] * (k - 1) + [(k * xi + Y) / (k + 1)]
    for z in (3.0, -2j, 2.5 + 2.5j):
        assert companion_trace_residual(roots, cps, z) < 1e-12


def test_trace_identity_on_solver_output():
    roots = UniformDisk().sample(512, 6)
    cps = solve(roots)
    zs = 2 * roots.eta * numpy.exp(2j * math.pi * numpy.arange(16) / 16)
    assert max(companion_trace_residual(roots, cps, z) for z in zs) < 1e-6


def test_trace_identity_detects_wrong_critical_points():
    roots = UniformDisk().sample(64, 6)
    cps = solve(roots).points.copy()
    cps[0] += 1e-3
    assert companion_trace_residual(roots, cps, 2.0) > 1e-6


def test_trace_identity_conditioning_error():
    with pytest.raises(ConditioningError):
        companion_trace_residual(RootSet([1, 3]), [], 2.0)
    with pytest.raises(ValueError):
        companion_trace_residual(RootSet([1, 3]), [2.0], 0)
