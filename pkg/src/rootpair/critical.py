"""
Critical points of ``p(z) = prod (z - X_j)`` computed from the roots.

The solver runs Aberth-Ehrlich on ``p'`` with the Newton ratio formed from
root sums, ``p'/p'' = S1 / (S1^2 - S2)``, so no coefficients are ever built.
Initial guesses are the first-order predictions ``w_hat_i`` next to each root.
"""

from dataclasses import dataclass, field
from typing import NamedTuple, Optional
import math
import warnings

import numpy

from . import _kernels
from .errors import ConvergenceError, NearZeroSetWarning, PoleError
from .polynomial import RootSet, as_points, derivative_coefficients, log_deriv_sums

__all__ = [
    "CriticalSet",
    "PredictedCP",
    "DetLocCertificate",
    "SolverOptions",
    "NearestCP",
    "predict",
    "solve",
    "certify",
    "nearest_cp",
    "count_within",
    "local_critical_point",
    "roots_from_coefficients",
]


@dataclass(frozen=True)
class SolverOptions:
    """Stopping rules for :func:`solve`.

    An iterate is frozen once its Aberth correction drops below
    ``tol * (1 + |w|)``, or once ``|S1(w)| < residual_tol * n / spread`` has held
    for ``polish`` consecutive sweeps (multiple critical points converge only
    linearly and never meet the correction test).
    """

    tol: float = 1e-13
    residual_tol: float = 1e-11
    max_iter: int = 200
    polish: int = 5


@dataclass(frozen=True)
class CriticalSet:
    """The ``n - 1`` critical points with per-point ``|S1|`` at convergence."""

    points: numpy.ndarray
    residuals: numpy.ndarray
    iterations: int

    def __len__(self):
        return int(self.points.size)

    def __iter__(self):
        return iter(self.points)


@dataclass(frozen=True)
class PredictedCP:
    root_index: int
    w_hat: complex
    denom: complex
    reliability: float
    unreliable: bool = False


@dataclass(frozen=True)
class DetLocCertificate:
    """Constants and condition flags of the deterministic localisation test.

    ``valid`` is a sufficient condition only: when it holds there is exactly
    one critical point within ``radius_large`` of ``xi`` and it lies within
    ``radius_small`` of ``c_n``.
    """

    xi: complex
    c1: float
    c2: float
    k_lip: float
    c_const: float
    n_threshold_ok: bool
    cond_i: bool
    cond_ii: bool
    cond_iii: bool
    c_n: complex
    radius_small: float
    radius_large: float
    valid: bool
    m_mu: Optional[complex] = None


class NearestCP(NamedTuple):
    index: int
    distance: float
    within_bound: Optional[bool]


def _root_points(roots):
    return roots.points if isinstance(roots, RootSet) else as_points(roots)


def _cp_points(cps):
    return cps.points if isinstance(cps, CriticalSet) else as_points(cps)


# ----------------------------------------------------------------------------
# prediction
# ----------------------------------------------------------------------------

def predict(roots, i):
    """
    First-order location of the critical point paired with root ``i``.

    With ``n`` total roots and ``D = sum_{j != i} 1/(X_i - X_j)``::

        w_hat = X_i - (1/n) * (n - 1) / D

    For ``xi`` plus ``m`` other roots this is ``xi - (1/(m+1)) * m / D``, the
    centre ``c_n`` of the localisation disk.
    """
    pts = _root_points(roots)
    n = pts.size
    i = int(i)
    xi = pts[i]
    others = numpy.delete(pts, i)
    diff = xi - others
    hit = numpy.flatnonzero(diff == 0)
    if hit.size:
        k = int(hit[0])
        raise PoleError(k if k < i else k + 1, complex(xi))
    denom = complex(numpy.sum(1.0 / diff))
    reliability = abs(denom) / (n - 1)
    unreliable = abs(denom) < 1e-14 * (n - 1)
    if unreliable:
        warnings.warn(f"root {i} is near the zero set of m_mu (|D| = {abs(denom):.3e}); "
                      "prediction unreliable", NearZeroSetWarning, stacklevel=2)
    w_hat = complex(xi - ((n - 1) / denom) / n) if denom != 0 else complex(numpy.nan, numpy.nan)
    return PredictedCP(i, w_hat, denom, reliability, unreliable)


# ----------------------------------------------------------------------------
# full solve
# ----------------------------------------------------------------------------

_GOLDEN = 2.399963229728653  # golden angle, spreads deterministic perturbations


def _nudge(k, scale):
    return scale * complex(math.cos(_GOLDEN * (k + 1)), math.sin(_GOLDEN * (k + 1)))


def _initial_guesses(uniq, weights, n, spread):
    pred, pull = _kernels.weighted_predictions(uniq, weights, float(n))
    reliability = numpy.abs(pull) / (n - 1)
    drop = int(numpy.argmin(reliability))
    guesses = numpy.delete(pred, drop)
    centers = numpy.delete(uniq, drop)
    bad = ~numpy.isfinite(guesses)
    for k in numpy.flatnonzero(bad):
        guesses[k] = centers[k] + _nudge(k, 1e-3 * spread)
    return _separate(guesses, uniq, spread)


def _separate(w, uniq, spread):
    """Nudge iterates that coincide with each other or with a root."""
    w = w.copy()
    scale = 1e-9 * spread
    roots = set(uniq.tolist())
    seen = set()
    for k in range(w.size):
        z = complex(w[k])
        bump = 0
        while z in seen or z in roots:
            bump += 1
            z = complex(w[k]) + _nudge(k + bump, scale * bump)
        seen.add(z)
        w[k] = z
    return w


def solve(roots, options=None):
    """
    All ``n - 1`` critical points of ``prod (z - X_j)``.

    A root of multiplicity ``k`` contributes ``k - 1`` critical points placed
    exactly at that root; the remaining ones are found by Aberth-Ehrlich
    sweeps started from the root-wise predictions (all but the least
    reliable one, which is the root nearest the zero set of ``m_mu``).

    Parameters
    ----------
    roots : RootSet or array_like
    options : SolverOptions, optional

    Returns
    -------
    CriticalSet

    Raises
    ------
    ConvergenceError
        If some iterate has not converged after ``options.max_iter`` sweeps,
        or non-finite values persist after one perturbed restart.
    """
    opts = options or SolverOptions()
    pts = _root_points(roots)
    n = pts.size
    if n < 2:
        raise ValueError("need at least 2 roots")
    uniq, counts = numpy.unique(pts, return_counts=True)
    multi = numpy.repeat(uniq[counts > 1], counts[counts > 1] - 1)
    if uniq.size == 1:
        return CriticalSet(multi, numpy.zeros(multi.size), 0)

    weights = counts.astype(numpy.float64)
    spread = float(numpy.max(numpy.abs(pts - numpy.mean(pts))))
    res_stop = opts.residual_tol * n / spread

    w = _initial_guesses(uniq, weights, n, spread)
    m = w.size
    residuals = numpy.full(m, numpy.inf)
    calm = numpy.zeros(m, dtype=numpy.int64)
    slow = numpy.zeros(m, dtype=bool)
    active = numpy.arange(m, dtype=numpy.int64)
    restarted = False
    it = 0
    while active.size and it < opts.max_iter:
        it += 1
        corr = numpy.empty(active.size, dtype=numpy.complex128)
        resid = numpy.empty(active.size)
        status = numpy.zeros(active.size, dtype=numpy.int64)
        _kernels.aberth_corrections(uniq, weights, w, active, corr, resid, status)

        if numpy.any(status == 3):
            if restarted:
                k = int(active[numpy.argmax(status == 3)])
                raise ConvergenceError("non-finite Aberth step after restart", numpy.inf, k)
            restarted = True
            base = _initial_guesses(uniq, weights, n, spread)
            w = _separate(base + numpy.array([_nudge(k, 1e-6 * spread) for k in range(m)]),
                          uniq, spread)
            active = numpy.arange(m, dtype=numpy.int64)
            calm[:] = 0
            slow[:] = False
            continue
        stuck = status != 0
        if numpy.any(stuck):
            # landed on a root or on another iterate: push off and retry
            for a in numpy.flatnonzero(stuck):
                k = int(active[a])
                w[k] += _nudge(k + it, 1e-7 * spread)

        ok = ~stuck
        w[active[ok]] -= corr[ok]
        residuals[active] = resid
        small = numpy.abs(corr) < opts.tol * (1.0 + numpy.abs(w[active]))
        calm[active] = numpy.where(resid < res_stop, calm[active] + 1, 0)
        done = ok & (small | (calm[active] >= opts.polish))
        slow[active[done & ~small]] = True
        active = active[~done]

    if active.size:
        worst = int(active[numpy.argmax(residuals[active])])
        raise ConvergenceError(f"Aberth did not converge in {opts.max_iter} sweeps",
                               float(residuals[worst]), worst)
    _polish_clusters(pts, w, residuals, slow, spread)
    points = numpy.concatenate([multi, w])
    res = numpy.concatenate([numpy.zeros(multi.size), residuals])
    points.setflags(write=False)
    res.setflags(write=False)
    return CriticalSet(points, res, it)


def _derivative_ratio(pts, z, k):
    """``p^(k)/p`` and its derivative at ``z`` from the power sums of ``1/(z - X)``."""
    inv = 1.0 / (z - pts)
    # derivatives of S1: S1^(r) = (-1)^r r! S_{r+1}
    s1d = []
    term = inv.copy()
    for r in range(k + 1):
        s1d.append((-1) ** r * math.factorial(r) * complex(numpy.sum(term)))
        term = term * inv
    # h_0 = 1, h_{j+1} = h_j' + S1 h_j; keep derivatives of h_j up to the order still needed
    h = [1.0 + 0j] + [0j] * (k + 1)
    for j in range(k):
        need = k - j
        h = [h[r + 1] + sum(math.comb(r, q) * s1d[q] * h[r - q] for q in range(r + 1))
             for r in range(need + 1)]
    return h[0], h[1]


def _polish_clusters(pts, w, residuals, slow, spread):
    """
    Refine groups of iterates sitting on one multiple critical point.

    Aberth converges only linearly to a ``k``-fold zero of ``p'`` and stops
    with errors near ``eps^(1/k)``. That zero is a simple zero of ``p^(k)``,
    so Newton on ``p^(k)/p`` from the group mean recovers full accuracy.
    Only iterates that stopped on the residual test are considered, and a
    refined point is kept only if it lands next to the group.
    """
    cand = numpy.flatnonzero(slow)
    if cand.size < 2:
        return
    # single-linkage groups; a k-fold cluster has width ~ eps^(1/k)
    radius = 1e-2 * spread
    label = {int(a): int(a) for a in cand}

    def find(a):
        while label[a] != a:
            a = label[a]
        return a

    for x in range(cand.size):
        for y in range(x + 1, cand.size):
            if abs(w[cand[x]] - w[cand[y]]) < radius:
                label[find(int(cand[y]))] = find(int(cand[x]))
    groups = {}
    for a in cand:
        groups.setdefault(find(int(a)), []).append(int(a))
    for group in groups.values():
        k = len(group)
        if k < 2:
            continue
        z = complex(numpy.mean(w[group]))
        diam = max(abs(w[b] - z) for b in group)
        start = z
        ok = False
        for _ in range(30):
            if numpy.any(pts == z):
                break
            h, dh = _derivative_ratio(pts, z, k)
            if dh == 0:
                break
            step = h / dh
            z -= step
            if abs(step) <= 4e-16 * (1 + abs(z)):
                ok = True
                break
        if ok and abs(z - start) <= 10 * diam + 1e-15 * spread:
            w[group] = z
            residuals[group] = abs(complex(numpy.sum(1.0 / (z - pts))))


# ----------------------------------------------------------------------------
# single critical point near a given start
# ----------------------------------------------------------------------------

def local_critical_point(roots, z0, tol=1e-14, max_iter=60):
    """
    Newton refinement of one zero of ``S1(z) = sum 1/(z - X_j)`` from ``z0``.

    Costs ``O(n)`` per step, which is what makes ``n ~ 1e5`` fluctuation
    studies feasible. Returns ``(w, |S1(w)|, iterations)``.
    """
    z = complex(z0)
    for it in range(1, max_iter + 1):
        sums = log_deriv_sums(roots, z)
        if sums.s2 == 0:
            raise ConvergenceError("vanishing S2 in Newton step", abs(sums.s1), 0)
        step = sums.s1 / sums.s2
        z = z + step
        if abs(step) <= tol * (1.0 + abs(z)):
            return z, abs(log_deriv_sums(roots, z).s1), it
    raise ConvergenceError("local Newton did not converge", abs(sums.s1), 0)


# ----------------------------------------------------------------------------
# localisation certificate
# ----------------------------------------------------------------------------

def certify(roots, xi_index, measure=None, ring_points=16, safety=1.5):
    """
    Check the deterministic localisation conditions for root ``xi_index``.

    The other ``m = n - 1`` roots play the random roots. Constants:
    ``C1 = a/2`` and ``C2 = 2a`` with ``a = |(1/m) sum 1/(xi - X_j)|``;
    ``k_Lip`` is ``safety`` times the largest ``|(1/m) sum (z - X_j)^-2|`` seen on
    a ring of ``ring_points`` points of radius ``2/(C1 m)`` (by the maximum
    principle the supremum over the disk is attained on its boundary);
    ``C = 1.01 * 8 (1 + 2 C2^2) / C1^3``.
    """
    pts = _root_points(roots)
    n = pts.size
    if n < 3:
        raise ValueError("certify needs n >= 3")
    xi = complex(pts[int(xi_index)])
    others = numpy.delete(pts, int(xi_index))
    m = others.size
    diff = xi - others
    mind = float(numpy.min(numpy.abs(diff)))
    m_mu = complex(measure.stieltjes(xi)) if measure is not None else None

    if mind == 0.0:
        return DetLocCertificate(xi, 0.0, 0.0, numpy.inf, numpy.inf, False, False, False,
                                 False, complex(numpy.nan, numpy.nan), numpy.inf, numpy.inf,
                                 False, m_mu)

    s = complex(numpy.sum(1.0 / diff))
    a = abs(s) / m
    if a == 0.0:
        return DetLocCertificate(xi, 0.0, 0.0, numpy.inf, numpy.inf, False, False, False,
                                 mind > 0, complex(numpy.nan, numpy.nan), numpy.inf,
                                 numpy.inf, False, m_mu)
    c1 = 0.5 * a
    c2 = 2.0 * a
    ring_r = 2.0 / (c1 * m)
    # holomorphic on the closed disk only if no root is inside it
    cond_ii = mind > ring_r
    if cond_ii:
        angles = 2 * math.pi * numpy.arange(ring_points) / ring_points
        ring = xi + ring_r * numpy.exp(1j * angles)
        lip = max(abs(log_deriv_sums(others, z).s2) / m for z in ring)
        k_lip = safety * lip
    else:
        k_lip = numpy.inf
    c_const = 1.01 * 8.0 * (1.0 + 2.0 * c2 ** 2) / c1 ** 3
    cond_i = c1 <= a <= c2
    cond_iii = mind > 3.0 / (c1 * m)
    n_ok = m > 4.0 * c2 * max(1.0 / c1, c_const * (k_lip + 1.0))
    c_n = xi - (m / s) / (m + 1)
    radius_small = c_const * (k_lip + 1.0) / m ** 2
    radius_large = 3.0 / (2.0 * c1 * m)
    valid = bool(cond_i and cond_ii and cond_iii and n_ok)
    return DetLocCertificate(xi, c1, c2, float(k_lip), c_const, bool(n_ok), bool(cond_i),
                             bool(cond_ii), bool(cond_iii), complex(c_n), float(radius_small),
                             float(radius_large), valid, m_mu)


# ----------------------------------------------------------------------------
# pairing helpers
# ----------------------------------------------------------------------------

def nearest_cp(roots, cps, i, measure=None):
    """
    Nearest critical point to root ``i``.

    ``within_bound`` compares the distance with ``3 / (|m_mu(X_i)| n)`` when a
    measure is supplied and ``m_mu(X_i) != 0``; otherwise it is ``None``.
    """
    pts = _root_points(roots)
    cp = _cp_points(cps)
    if cp.size == 0:
        raise ValueError("no critical points given")
    x = pts[int(i)]
    dist = numpy.abs(cp - x)
    k = int(numpy.argmin(dist))
    within = None
    if measure is not None:
        mm = abs(complex(measure.stieltjes(x)))
        if mm > 0:
            within = bool(dist[k] <= 3.0 / (mm * pts.size))
    return NearestCP(k, float(dist[k]), within)


def count_within(cps, center, radius):
    """Number of critical points in the closed disk ``|z - center| <= radius``."""
    cp = _cp_points(cps)
    return int(numpy.count_nonzero(numpy.abs(cp - complex(center)) <= radius))


# ----------------------------------------------------------------------------
# coefficient oracle
# ----------------------------------------------------------------------------

def roots_from_coefficients(coeffs, max_iter=500, tol=1e-15):
    """
    All roots of a polynomial given by lowest-degree-first coefficients.

    Plain Aberth on Horner evaluations, started on a circle of radius equal to
    the Fujiwara bound. Independent of the root-form machinery above, so it
    serves as a cross-check at small degree.
    """
    c = numpy.asarray(coeffs, dtype=numpy.complex128).reshape(-1)
    while c.size > 1 and c[-1] == 0:
        c = c[:-1]
    deg = c.size - 1
    if deg < 1:
        return numpy.zeros(0, dtype=numpy.complex128)
    hi = (c / c[-1])[::-1].copy()
    dhi = derivative_coefficients(c / c[-1])[::-1].copy()
    k = numpy.arange(1, deg + 1)
    bound = 2.0 * numpy.max(numpy.abs(hi[1:]) ** (1.0 / k))
    radius = max(bound / 2.0, 1e-3)
    z = radius * numpy.exp(1j * (2 * math.pi * numpy.arange(deg) / deg + 0.4))
    _kernels.coefficient_aberth(hi, dhi, z, max_iter, tol * max(1.0, radius))
    return z
