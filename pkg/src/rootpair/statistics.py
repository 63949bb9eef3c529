"""
Monte Carlo harnesses: fluctuation CLTs around the predicted critical point,
heavy-tailed sums of ``1/(xi - X)``, linear statistics of roots versus
critical points, the log-potential identity and a companion-matrix trace check.
"""

from dataclasses import dataclass, field
import math

import numpy

from .critical import CriticalSet, local_critical_point, predict, solve
from .errors import ConditioningError, InsufficientDataError, UnsupportedMeasureError
from .measures import make_rng, sample
from .polynomial import RootSet, as_points, log_abs_poly_many

__all__ = [
    "CubicBump",
    "FluctuationSample",
    "CovTarget",
    "CovarianceReport",
    "HeavyTailReport",
    "fluct_sample",
    "cov_target",
    "covariance_check",
    "heavy_tail_variance",
    "linear_statistic_gap",
    "mc_log_potential",
    "companion_trace_residual",
    "FULL_SOLVE_MAX",
]

# above this many roots fluct_sample refines only the critical point near xi
FULL_SOLVE_MAX = 5001


def _pts(x):
    if isinstance(x, (RootSet, CriticalSet)):
        return x.points
    return as_points(x)


# ----------------------------------------------------------------------------
# test function
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class CubicBump:
    """
    ``phi(z) = amplitude * (1 - t)^3`` with ``t = |z - center|^2 / radius^2``,
    zero for ``t > 1``.

    The cube makes ``phi`` twice continuously differentiable across ``t = 1``.
    """

    center: complex = 0j
    radius: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    def _t(self, z):
        u = numpy.asarray(z, dtype=numpy.complex128) - self.center
        return u, (u.real ** 2 + u.imag ** 2) / self.radius ** 2

    def value(self, z):
        _, t = self._t(z)
        s = numpy.clip(1.0 - t, 0.0, None)
        return self.amplitude * s ** 3

    __call__ = value

    def gradient(self, z):
        """Gradient as a complex number ``d/dx + i d/dy``."""
        u, t = self._t(z)
        s = numpy.clip(1.0 - t, 0.0, None)
        return -6.0 * self.amplitude * s ** 2 * u / self.radius ** 2

    def laplacian(self, z):
        """``12 a (1 - t)(3t - 1) / R^2`` inside the support."""
        _, t = self._t(z)
        s = numpy.clip(1.0 - t, 0.0, None)
        return 12.0 * self.amplitude * s * (3.0 * t - 1.0) / self.radius ** 2

    def l1_laplacian(self):
        """``||Delta phi||_1 = 32 pi |a| / 9``, whatever the radius."""
        return 32.0 * math.pi * abs(self.amplitude) / 9.0


# ----------------------------------------------------------------------------
# fluctuations
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class FluctuationSample:
    """One scaled residual of the critical point next to ``xi``.

    ``flagged`` is set when that critical point is farther than
    ``3 / (|m_mu(xi)| n)`` from ``xi``.
    """

    value: complex
    regime: str
    flagged: bool = False
    distance: float = 0.0
    w: complex = 0j
    seed: int = 0


def _scale(n, regime):
    if regime == "inside":
        return n ** 1.5 / math.sqrt(math.log(n))
    if regime == "outside":
        return n ** 1.5
    raise ValueError(f"regime must be 'inside' or 'outside', got {regime!r}")


def fluct_sample(measure, xi, n, seed, regime, options=None, method="auto"):
    """
    Scaled fluctuation of the critical point paired with a deterministic root.

    Draws ``n`` roots, appends ``xi`` and returns
    ``scale * m^2 * (w - xi + 1/((n+1) m))`` with ``m = m_mu(xi)`` and ``w``
    the critical point nearest ``xi``. ``scale`` is ``n^{3/2}/sqrt(ln n)``
    inside the support and ``n^{3/2}`` outside.

    Parameters
    ----------
    method : {"auto", "full", "local"}
        ``full`` solves for all critical points; ``local`` runs Newton on
        ``S1`` from the first-order prediction, ``O(n)`` per step. ``auto``
        switches to ``local`` above ``FULL_SOLVE_MAX`` roots.
    """
    scale = _scale(n, regime)
    xi = complex(xi)
    m = complex(measure.stieltjes(xi))
    if m == 0:
        raise ValueError(f"m_mu vanishes at xi = {xi!r}")
    roots = sample(measure, n, seed).with_roots([xi])
    if method == "auto":
        method = "full" if roots.n <= FULL_SOLVE_MAX else "local"
    if method == "full":
        cps = solve(roots, options).points
        w = complex(cps[numpy.argmin(numpy.abs(cps - xi))])
    elif method == "local":
        start = predict(roots, roots.n - 1).w_hat
        w, _, _ = local_critical_point(roots, start)
    else:
        raise ValueError(f"unknown method {method!r}")
    dist = abs(w - xi)
    value = scale * m * m * (w - xi + 1.0 / ((n + 1) * m))
    flagged = dist > 3.0 / (abs(m) * n)
    return FluctuationSample(complex(value), regime, bool(flagged), dist, w, int(seed))


@dataclass(frozen=True)
class CovTarget:
    """Target covariance of ``(Re, Im)``; ``stderr`` is set for Monte Carlo targets."""

    re_var: float
    im_var: float
    cross: float
    stderr: tuple = (0.0, 0.0, 0.0)

    @property
    def trace(self):
        return self.re_var + self.im_var


def _cov_entries(x, y):
    xc = x - x.mean()
    yc = y - y.mean()
    return xc, yc


def cov_target(measure, xi, regime, draws=10 ** 6, seed=0):
    """
    Limiting covariance of the scaled residual.

    Inside the support it is ``(pi f(xi)/2, pi f(xi)/2, 0)``. Outside it is
    the covariance of ``1/(xi - X)``, estimated from ``draws`` samples with
    standard errors.
    """
    xi = complex(xi)
    if regime == "inside":
        f = float(measure.density(xi))
        v = math.pi * f / 2.0
        return CovTarget(v, v, 0.0)
    if regime != "outside":
        raise ValueError(f"regime must be 'inside' or 'outside', got {regime!r}")
    x = measure.sample_points(int(draws), make_rng(seed))
    v = 1.0 / (xi - x)
    xc, yc = _cov_entries(v.real, v.imag)
    N = v.size
    prods = (xc * xc, yc * yc, xc * yc)
    est = tuple(float(p.sum() / (N - 1)) for p in prods)
    se = tuple(float(p.std(ddof=1) / math.sqrt(N)) for p in prods)
    return CovTarget(est[0], est[1], est[2], se)


@dataclass(frozen=True)
class CovarianceReport:
    """Empirical covariance of complex samples against a target.

    ``se_*`` are jackknife standard errors, ``z_*`` the z-scores against the
    target. ``robust_*_var`` are ``(IQR/1.349)^2`` per component, a spread
    measure that ignores the tails and is reported for diagnosis only.
    """

    n_samples: int
    re_var: float
    im_var: float
    cross: float
    se_re: float
    se_im: float
    se_cross: float
    z_re: float
    z_im: float
    z_cross: float
    robust_re_var: float
    robust_im_var: float
    within_tol: bool
    within_z: bool
    passed: bool
    target: CovTarget = None

    def to_dict(self):
        out = {k: getattr(self, k) for k in (
            "n_samples", "re_var", "im_var", "cross", "se_re", "se_im", "se_cross",
            "z_re", "z_im", "z_cross", "robust_re_var", "robust_im_var",
            "within_tol", "within_z", "passed")}
        out["target"] = [self.target.re_var, self.target.im_var, self.target.cross]
        return out


def _jackknife_cov(x, y):
    """Sample covariance and its leave-one-out jackknife standard error."""
    N = x.size
    sx, sy, sxy = x.sum(), y.sum(), (x * y).sum()
    full = (sxy - sx * sy / N) / (N - 1)
    loo = ((sxy - x * y) - (sx - x) * (sy - y) / (N - 1)) / (N - 2)
    se = math.sqrt((N - 1) / N * float(numpy.sum((loo - loo.mean()) ** 2)))
    return float(full), se


def _iqr_var(x):
    q1, q3 = numpy.percentile(x, [25, 75])
    return float(((q3 - q1) / 1.349) ** 2)


def covariance_check(samples, target, var_rtol=None, cross_atol=None, scale="target",
                     z_max=3.0, min_samples=100):
    """
    Compare the empirical covariance of complex samples with ``target``.

    Parameters
    ----------
    samples : sequence of complex or FluctuationSample
        Flagged fluctuation samples are dropped.
    target : CovTarget
    var_rtol, cross_atol : float, optional
        Tolerances. With ``scale="target"`` each variance must be within
        ``var_rtol`` relative of its target and the cross term within
        ``cross_atol`` absolute. With ``scale="trace"`` every entry must be
        within ``var_rtol * trace(target)`` of its target.
    z_max : float
        Bound on ``|z|`` for the z-score verdict.

    Returns
    -------
    CovarianceReport
        ``passed`` is the tolerance verdict when tolerances are given,
        otherwise the z-score verdict.

    Raises
    ------
    InsufficientDataError
        Fewer than ``min_samples`` usable samples.
    """
    vals = []
    for s in samples:
        if isinstance(s, FluctuationSample):
            if s.flagged:
                continue
            s = s.value
        vals.append(complex(s))
    v = numpy.asarray(vals, dtype=numpy.complex128)
    if v.size < min_samples:
        raise InsufficientDataError(f"need >= {min_samples} samples, got {v.size}")
    x, y = v.real, v.imag
    re_var, se_re = _jackknife_cov(x, x)
    im_var, se_im = _jackknife_cov(y, y)
    cross, se_x = _jackknife_cov(x, y)

    def z(emp, tgt, se):
        if se == 0:
            return 0.0 if emp == tgt else math.copysign(math.inf, emp - tgt)
        return (emp - tgt) / se

    zs = (z(re_var, target.re_var, se_re), z(im_var, target.im_var, se_im),
          z(cross, target.cross, se_x))
    within_z = all(abs(q) <= z_max for q in zs)

    within_tol = None
    if var_rtol is not None:
        if scale == "target":
            within_tol = (abs(re_var - target.re_var) <= var_rtol * target.re_var
                          and abs(im_var - target.im_var) <= var_rtol * target.im_var)
            if cross_atol is not None:
                within_tol = within_tol and abs(cross - target.cross) <= cross_atol
        elif scale == "trace":
            band = var_rtol * target.trace
            within_tol = all(abs(e - t) <= band for e, t in
                             ((re_var, target.re_var), (im_var, target.im_var),
                              (cross, target.cross)))
        else:
            raise ValueError(f"scale must be 'target' or 'trace', got {scale!r}")
    passed = within_z if within_tol is None else within_tol
    return CovarianceReport(int(v.size), re_var, im_var, cross, se_re, se_im, se_x,
                            *zs, _iqr_var(x), _iqr_var(y),
                            bool(within_tol) if within_tol is not None else False,
                            bool(within_z), bool(passed), target)


# ----------------------------------------------------------------------------
# heavy-tailed sums
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class HeavyTailReport:
    """
    Variances of ``Z = (n ln n)^{-1/2} sum_j t (1/(xi - X_j) - m_mu(xi))``.

    ``raw_*`` use every term. ``trunc_*`` drop terms with
    ``|1/(xi - X_j)| >= eps * sqrt(n ln n)``; the untruncated summand has
    infinite variance, so only the truncated sums have a finite second
    moment with the target as limit. ``ratio_*`` refer to the truncated
    variances.
    """

    target: float
    raw_re_var: float
    raw_im_var: float
    trunc_re_var: float
    trunc_im_var: float
    ratio_re: float
    ratio_im: float
    raw_ratio_re: float
    raw_ratio_im: float
    eps: float
    n: int
    n_seeds: int
    raw: numpy.ndarray = field(default=None, repr=False)
    truncated: numpy.ndarray = field(default=None, repr=False)


def heavy_tail_variance(measure, xi, t, n, seeds, eps=0.5):
    """
    Empirical variance of the normalised sum of ``t / (xi - X_j)`` over seeds.

    The target per component is ``pi |t|^2 f(xi) / 2``.
    """
    xi = complex(xi)
    t = complex(t)
    f = float(measure.density(xi))
    if f <= 0:
        raise UnsupportedMeasureError("xi must lie where the density is positive")
    m = complex(measure.stieltjes(xi))
    norm = math.sqrt(n * math.log(n))
    cut = eps * norm
    raw = numpy.empty(len(seeds), dtype=numpy.complex128)
    trunc = numpy.empty(len(seeds), dtype=numpy.complex128)
    for k, seed in enumerate(seeds):
        v = 1.0 / (xi - sample(measure, n, seed).points)
        d = v - m
        raw[k] = t * numpy.sum(d) / norm
        trunc[k] = t * numpy.sum(d[numpy.abs(v) < cut]) / norm
    target = math.pi * abs(t) ** 2 * f / 2.0

    def var(a):
        return float(numpy.var(a, ddof=1)) if a.size > 1 else 0.0

    rv = (var(raw.real), var(raw.imag))
    tv = (var(trunc.real), var(trunc.imag))

    def ratio(a):
        return a / target if target > 0 else float("nan")

    return HeavyTailReport(target, rv[0], rv[1], tv[0], tv[1], ratio(tv[0]), ratio(tv[1]),
                           ratio(rv[0]), ratio(rv[1]), eps, int(n), len(seeds), raw, trunc)


# ----------------------------------------------------------------------------
# linear statistics and the log-potential
# ----------------------------------------------------------------------------

def linear_statistic_gap(roots, cps, phi):
    """
    ``(|sum phi(w_j) - sum phi(X_i)|, ||Delta phi||_1 ln n)``.

    The sums have ``n - 1`` and ``n`` terms; the mismatch is left in.
    """
    x = _pts(roots)
    w = _pts(cps)
    gap = abs(math.fsum(phi.value(w)) - math.fsum(phi.value(x)))
    return gap, phi.l1_laplacian() * math.log(x.size)


def mc_log_potential(phi, roots, m_samples, seed, chunk=2048):
    """
    Monte Carlo estimate of ``sum phi(X_i)`` from ``log|p|``.

    Uses ``sum phi(X_i) = (1/2pi) int_B Delta phi(z) log|p(z)| d^2z`` with ``B``
    the bounding square of the support of ``phi`` enlarged by 10%, and
    ``m_samples`` uniform points in ``B``.

    Returns
    -------
    estimate, stderr : float
    """
    m_samples = int(m_samples)
    if m_samples < 1000:
        raise ValueError("m_samples must be at least 1000")
    if phi.amplitude == 0:
        return 0.0, 0.0
    pts = _pts(roots)
    half = 1.1 * phi.radius
    area = (2 * half) ** 2
    rng = make_rng(seed)
    z = phi.center + half * (2 * rng.random(m_samples) - 1) + 1j * half * (2 * rng.random(m_samples) - 1)
    lap = phi.laplacian(z)
    vals = numpy.zeros(m_samples)
    live = numpy.flatnonzero(lap != 0)
    lp = log_abs_poly_many(pts, z[live], chunk)
    hit = ~numpy.isfinite(lp)
    while numpy.any(hit):
        # a draw landed on a root: replace it with a fresh point
        k = live[hit]
        z[k] = phi.center + half * (2 * rng.random(k.size) - 1) + 1j * half * (2 * rng.random(k.size) - 1)
        lap[k] = phi.laplacian(z[k])
        lp[hit] = log_abs_poly_many(pts, z[k], chunk)
        hit = ~numpy.isfinite(lp)
    vals[live] = lap[live] * lp
    c = area / (2 * math.pi)
    est = c * float(vals.mean())
    se = c * float(vals.std(ddof=1)) / math.sqrt(m_samples)
    return est, se


# ----------------------------------------------------------------------------
# companion trace identity
# ----------------------------------------------------------------------------

def companion_trace_residual(roots, cps, z):
    """
    ``|LHS - RHS|`` for the trace of the resolvent of ``D (I - J/n)``.

    ``LHS = sum 1/(z - w_j) + 1/z`` comes from the critical points (the
    matrix has eigenvalues ``w_j`` and ``0``); ``RHS`` comes from the roots
    through the rank-one update:
    ``S1(z) - (1/n) (sum X_i/(z - X_i)^2) / ((z/n) S1(z))``.

    Raises
    ------
    ConditioningError
        If ``|(z/n) S1(z)| <= 1e-12``.
    """
    x = _pts(roots)
    w = _pts(cps)
    z = complex(z)
    n = x.size
    if z == 0 or numpy.any(x == z) or numpy.any(w == z):
        raise ValueError("z must avoid 0, the roots and the critical points")
    inv = 1.0 / (z - x)
    s1 = complex(numpy.sum(inv))
    denom = (z / n) * s1
    if abs(denom) <= 1e-12:
        raise ConditioningError(f"|(z/n) S1(z)| = {abs(denom):.3e} too small")
    lhs = complex(numpy.sum(1.0 / (z - w))) + 1.0 / z
    rhs = s1 - (complex(numpy.sum(x * inv * inv)) / n) / denom
    return abs(lhs - rhs)
