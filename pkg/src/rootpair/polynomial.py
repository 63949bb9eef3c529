"""
Root-form representation of ``p(z) = prod_j (z - X_j)``.

All quantities used downstream (``S1 = p'/p``, ``S2``, ``log|p|``) are sums
over the roots; coefficients exist only as a small-degree test oracle.
"""

from dataclasses import dataclass

import numpy

from .errors import DegreeError, PoleError, SizeError

__all__ = [
    "RootSet",
    "LogDerivSums",
    "as_points",
    "log_deriv_sums",
    "log_abs_poly",
    "expand_coefficients",
    "derivative_coefficients",
    "POLE_TOL",
    "MAX_EXPAND_DEGREE",
    "log_abs_poly_many",
    "horner",
]

POLE_TOL = 1e-300
MAX_EXPAND_DEGREE = 64


def as_points(points):
    """Return ``points`` as a finite, 1-D ``complex128`` array."""
    arr = numpy.asarray(points)
    if arr.ndim == 2 and arr.shape[1] == 2 and not numpy.iscomplexobj(arr):
        arr = arr[:, 0] + 1j * arr[:, 1]
    arr = numpy.array(arr, dtype=numpy.complex128).reshape(-1)
    if not numpy.all(numpy.isfinite(arr)):
        raise ValueError("points must be finite (no NaN/Inf)")
    return arr


class RootSet(object):
    """
    Ordered multiset of roots ``X_1, ..., X_n`` with cached statistics.

    Parameters
    ----------
    points : array_like
        Complex roots, or an ``(n, 2)`` real array of ``(re, im)`` pairs.

    Attributes
    ----------
    points : numpy.ndarray
        Read-only ``complex128`` array of length ``n``.
    n : int
    mean : complex
        Root mean ``(1/n) sum X_j``.
    eta : float
        Largest modulus ``max |X_j|``.
    """

    __slots__ = ("points", "n", "mean", "eta")

    def __init__(self, points):
        pts = as_points(points)
        if pts.size < 2:
            raise ValueError(f"a RootSet needs at least 2 roots, got {pts.size}")
        pts.setflags(write=False)
        self.points = pts
        self.n = int(pts.size)
        self.mean = complex(numpy.sum(pts) / self.n)
        self.eta = float(numpy.max(numpy.abs(pts)))

    def __len__(self):
        return self.n

    def __iter__(self):
        return iter(self.points)

    def __repr__(self):
        return f"RootSet(n={self.n}, mean={self.mean:.6g}, eta={self.eta:.6g})"

    def __eq__(self, other):
        if not isinstance(other, RootSet):
            return NotImplemented
        return numpy.array_equal(self.points, other.points)

    def __hash__(self):
        return hash(self.points.tobytes())

    def with_roots(self, extra):
        """New RootSet with ``extra`` roots appended (deterministic roots)."""
        return RootSet(numpy.concatenate([self.points, as_points(extra)]))


@dataclass(frozen=True)
class LogDerivSums:
    """``s1 = sum 1/(z-X_j)``, ``s2 = sum 1/(z-X_j)^2`` and ``min_j |z-X_j|``."""

    s1: complex
    s2: complex
    min_dist: float


def _points_of(roots):
    if isinstance(roots, RootSet):
        return roots.points
    return as_points(roots)


def _diffs(pts, z):
    diff = complex(z) - pts
    dist = numpy.abs(diff)
    k = int(numpy.argmin(dist))
    if dist[k] <= POLE_TOL:
        raise PoleError(k, complex(pts[k]))
    return diff, float(dist[k])


def log_deriv_sums(roots, z):
    """
    Evaluate ``S1(z) = p'(z)/p(z)`` and ``S2(z) = sum (z-X_j)^{-2}``.

    Sums use numpy's pairwise reduction, so the result does not depend on
    thread count.

    Raises
    ------
    PoleError
        If ``z`` is within ``POLE_TOL`` of a root.
    """
    diff, dmin = _diffs(_points_of(roots), z)
    inv = 1.0 / diff
    return LogDerivSums(complex(numpy.sum(inv)), complex(numpy.sum(inv * inv)), dmin)


def log_abs_poly(roots, z):
    """``log|p(z)| = sum_j log|z - X_j|`` without forming ``p(z)``."""
    diff, _ = _diffs(_points_of(roots), z)
    return float(numpy.sum(numpy.log(numpy.abs(diff))))


def log_abs_poly_many(roots, zs, chunk=4096):
    """Vectorised :func:`log_abs_poly` over an array of evaluation points.

    Points that hit a root exactly produce ``-inf``; callers decide what to do.
    """
    pts = _points_of(roots)
    zs = numpy.asarray(zs, dtype=numpy.complex128).reshape(-1)
    out = numpy.empty(zs.size)
    for start in range(0, zs.size, chunk):
        block = zs[start:start + chunk, None] - pts[None, :]
        with numpy.errstate(divide="ignore"):
            out[start:start + chunk] = numpy.sum(numpy.log(numpy.abs(block)), axis=1)
    return out


def expand_coefficients(roots):
    """
    Monic coefficients of ``prod (z - X_j)``, lowest degree first.

    Only meant as a test oracle; refuses degrees above 64.
    """
    pts = _points_of(roots)
    if pts.size > MAX_EXPAND_DEGREE:
        raise SizeError(f"coefficient expansion limited to degree {MAX_EXPAND_DEGREE}, got {pts.size}")
    coeffs = numpy.zeros(pts.size + 1, dtype=numpy.complex128)
    coeffs[0] = 1.0
    # multiply by (z - x): new[k] = old[k-1] - x * old[k]
    for deg, x in enumerate(pts, start=1):
        shifted = numpy.concatenate([[0.0], coeffs[:deg]])
        coeffs[:deg + 1] = shifted - x * numpy.concatenate([coeffs[:deg], [0.0]])
    return coeffs


def derivative_coefficients(coeffs):
    """Term-by-term derivative of a lowest-degree-first coefficient list."""
    c = numpy.asarray(coeffs, dtype=numpy.complex128).reshape(-1)
    if c.size < 2:
        raise DegreeError("cannot differentiate a constant polynomial")
    return c[1:] * numpy.arange(1, c.size)


def horner(coeffs, z):
    """Evaluate a lowest-degree-first coefficient array at ``z``."""
    c = numpy.asarray(coeffs, dtype=numpy.complex128)
    z = numpy.asarray(z, dtype=numpy.complex128)
    acc = numpy.zeros_like(z) + c[-1]
    for a in c[-2::-1]:
        acc = acc * z + a
    return acc
