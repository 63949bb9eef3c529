"""
Root distributions: densities, samplers, Cauchy-Stieltjes transforms
``m(z) = int dmu(x) / (z - x)`` and their known zero sets.

Every sampler draws from a Philox counter-based generator so a given
``(measure, n, seed)`` yields the same roots on every platform.
"""

from dataclasses import dataclass, field
import math

import numpy

from .errors import MeasureDomainError, UnsupportedMeasureError
from .polynomial import RootSet, as_points

__all__ = [
    "Measure",
    "UniformDisk",
    "TwoDisks",
    "ComplexGaussian",
    "UnitCircle",
    "RadialCdf",
    "Empirical",
    "ZeroSet",
    "make_rng",
    "stieltjes",
    "density",
    "sample",
    "zero_set",
    "measure_from_dict",
]


def make_rng(seed):
    """Philox-backed generator; the documented RNG for every seeded operation."""
    return numpy.random.Generator(numpy.random.Philox(int(seed)))


def _finite_complex(z, name="z"):
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"{name} must be finite, got {z!r}")
    return z


def _as_array(z):
    return numpy.asarray(z, dtype=numpy.complex128)


def _restore(z, out):
    """Return a Python scalar when ``z`` was scalar."""
    if numpy.ndim(z) == 0:
        return out.item()
    return out


@dataclass(frozen=True)
class ZeroSet:
    """Known zeros of ``m_mu``; ``complete`` says whether the list is exhaustive."""

    zeros: tuple
    complete: bool


class Measure(object):
    """Base class. Subclasses are immutable and safe to share across workers."""

    kind = None
    radially_symmetric = False

    def stieltjes(self, z):
        raise NotImplementedError

    def density(self, z):
        raise UnsupportedMeasureError(f"{self.kind} measure has no density")

    def sample_points(self, n, rng):
        raise NotImplementedError

    def zero_set(self):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError

    def sample(self, n, seed):
        """``n`` iid roots as a :class:`RootSet`, deterministic in ``seed``."""
        n = int(n)
        if n < 2:
            raise ValueError(f"need n >= 2 samples, got {n}")
        return RootSet(self.sample_points(n, make_rng(seed)))


@dataclass(frozen=True, eq=True)
class UniformDisk(Measure):
    """Uniform distribution on the closed disk ``|z - center| <= radius``."""

    center: complex = 0j
    radius: float = 1.0
    kind = "uniform_disk"
    radially_symmetric = True

    def __post_init__(self):
        object.__setattr__(self, "center", _finite_complex(self.center, "center"))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError(f"radius must be positive, got {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))

    def stieltjes(self, z):
        za = _as_array(z)
        u = za - self.center
        r2 = self.radius ** 2
        inside = numpy.abs(u) <= self.radius
        with numpy.errstate(divide="ignore", invalid="ignore"):
            out = numpy.where(inside, numpy.conj(u) / r2, 1.0 / numpy.where(inside, 1.0, u))
        return _restore(z, out)

    def density(self, z):
        za = _as_array(z)
        inside = numpy.abs(za - self.center) <= self.radius
        out = numpy.where(inside, 1.0 / (math.pi * self.radius ** 2), 0.0)
        return _restore(z, out)

    def cdf(self, r):
        r = numpy.asarray(r, dtype=float)
        return numpy.clip((r / self.radius) ** 2, 0.0, 1.0)

    def sample_points(self, n, rng):
        u = rng.random(n)
        theta = 2.0 * math.pi * rng.random(n)
        r = self.radius * numpy.sqrt(u)
        return self.center + r * numpy.exp(1j * theta)

    def zero_set(self):
        return ZeroSet((self.center,), True)

    def to_dict(self):
        return {"kind": self.kind, "center": [self.center.real, self.center.imag],
                "radius": self.radius}


@dataclass(frozen=True, eq=True)
class TwoDisks(Measure):
    """Uniform on ``B(-2, 1)`` union ``B(2, 1)``, half the mass on each."""

    kind = "two_disks"

    def stieltjes(self, z):
        za = _as_array(z)
        left = numpy.abs(za + 2) < 1
        right = numpy.abs(za - 2) < 1
        with numpy.errstate(divide="ignore", invalid="ignore"):
            outer = za / (za * za - 4)
            in_left = 0.5 * (numpy.conj(za + 2) + 1.0 / (za - 2))
            in_right = 0.5 * (numpy.conj(za - 2) + 1.0 / (za + 2))
        out = numpy.where(left, in_left, numpy.where(right, in_right, outer))
        return _restore(z, out)

    def density(self, z):
        za = _as_array(z)
        inside = (numpy.abs(za + 2) <= 1) | (numpy.abs(za - 2) <= 1)
        return _restore(z, numpy.where(inside, 1.0 / (2 * math.pi), 0.0))

    def sample_points(self, n, rng):
        side = numpy.where(rng.random(n) < 0.5, -2.0, 2.0)
        r = numpy.sqrt(rng.random(n))
        theta = 2.0 * math.pi * rng.random(n)
        return side + r * numpy.exp(1j * theta)

    def zero_set(self):
        s = math.sqrt(3.0)
        return ZeroSet((complex(-s), 0j, complex(s)), True)

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True, eq=True)
class ComplexGaussian(Measure):
    """Standard complex normal, density ``exp(-|z|^2)/pi``."""

    kind = "complex_gaussian"
    radially_symmetric = True
    center = 0j

    def stieltjes(self, z):
        za = _as_array(z)
        r2 = (za * numpy.conj(za)).real
        with numpy.errstate(divide="ignore", invalid="ignore"):
            out = numpy.where(r2 == 0, 0j, -numpy.expm1(-r2) / numpy.where(r2 == 0, 1.0, za))
        return _restore(z, out)

    def density(self, z):
        za = _as_array(z)
        return _restore(z, numpy.exp(-numpy.abs(za) ** 2) / math.pi)

    def cdf(self, r):
        return -numpy.expm1(-numpy.asarray(r, dtype=float) ** 2)

    def sample_points(self, n, rng):
        scale = math.sqrt(0.5)
        return rng.normal(0.0, scale, n) + 1j * rng.normal(0.0, scale, n)

    def zero_set(self):
        return ZeroSet((0j,), True)

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True, eq=True)
class UnitCircle(Measure):
    """Uniform on the circle ``|z| = 1`` (singular: no density)."""

    kind = "unit_circle"
    radially_symmetric = True
    center = 0j

    def stieltjes(self, z):
        za = _as_array(z)
        r = numpy.abs(za)
        on = numpy.isclose(r, 1.0, rtol=0.0, atol=1e-15)
        if numpy.any(on):
            bad = za.reshape(-1)[numpy.argmax(on.reshape(-1))]
            raise MeasureDomainError(complex(bad), "point lies on the unit circle")
        with numpy.errstate(divide="ignore", invalid="ignore"):
            out = numpy.where(r > 1, 1.0 / numpy.where(r > 1, za, 1.0), 0j)
        return _restore(z, out)

    def sample_points(self, n, rng):
        return numpy.exp(2j * math.pi * rng.random(n))

    def zero_set(self):
        # m vanishes on the whole open unit disk, so a finite list is never exhaustive
        return ZeroSet((0j,), False)

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True, eq=False)
class RadialCdf(Measure):
    """
    Radially symmetric law about ``center`` given by its radial CDF.

    Parameters
    ----------
    cdf : callable
        ``r -> P(|X - center| < r)``; vectorised, nondecreasing, limit 1.
    density : callable
        Planar density as a function of the radius ``r``.
    center : complex
    """

    cdf: object = None
    radial_density: object = None
    center: complex = 0j
    kind = "radial_cdf"
    radially_symmetric = True

    def __post_init__(self):
        if not callable(self.cdf) or not callable(self.radial_density):
            raise ValueError("RadialCdf needs callable cdf and density")
        object.__setattr__(self, "center", _finite_complex(self.center, "center"))
        probe = numpy.array([0.0, 1e-3, 0.1, 1.0, 10.0, 1e3, 1e6])
        c = numpy.asarray(self.cdf(probe), dtype=float)
        if numpy.any(numpy.diff(c) < -1e-15) or abs(c[-1] - 1.0) > 1e-6:
            raise ValueError("cdf must be nondecreasing with limit 1")
        if numpy.any(numpy.asarray(self.radial_density(probe)) < 0):
            raise ValueError("density must be nonnegative")

    def stieltjes(self, z):
        za = _as_array(z)
        u = za - self.center
        r = numpy.abs(u)
        p = numpy.asarray(self.cdf(r), dtype=float)
        with numpy.errstate(divide="ignore", invalid="ignore"):
            out = numpy.where(r == 0, 0j, p / numpy.where(r == 0, 1.0, u))
        return _restore(z, out)

    def density(self, z):
        za = _as_array(z)
        out = numpy.asarray(self.radial_density(numpy.abs(za - self.center)), dtype=float)
        return _restore(z, out)

    def _inverse_cdf(self, u):
        lo = numpy.zeros_like(u)
        hi = numpy.ones_like(u)
        for _ in range(200):
            short = self.cdf(hi) < u
            if not numpy.any(short):
                break
            hi = numpy.where(short, 2 * hi, hi)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            below = self.cdf(mid) < u
            lo = numpy.where(below, mid, lo)
            hi = numpy.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def sample_points(self, n, rng):
        r = self._inverse_cdf(rng.random(n))
        theta = 2.0 * math.pi * rng.random(n)
        return self.center + r * numpy.exp(1j * theta)

    def zero_set(self):
        return ZeroSet((self.center,), False)

    def to_dict(self):
        raise UnsupportedMeasureError("RadialCdf holds callables and cannot be serialised")


@dataclass(frozen=True, eq=False)
class Empirical(Measure):
    """Uniform atomic measure on a nonempty point list."""

    points: numpy.ndarray = field(default_factory=lambda: numpy.zeros(1, complex))
    kind = "empirical"

    def __post_init__(self):
        pts = as_points(self.points)
        if pts.size == 0:
            raise ValueError("Empirical measure needs at least one point")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def stieltjes(self, z):
        za = _as_array(z)
        flat = za.reshape(-1)
        out = numpy.empty(flat.size, dtype=numpy.complex128)
        for k, zk in enumerate(flat):
            diff = zk - self.points
            hit = diff == 0
            if numpy.any(hit):
                raise MeasureDomainError(complex(zk), f"atom {int(numpy.argmax(hit))}")
            out[k] = numpy.mean(1.0 / diff)
        return _restore(z, out.reshape(za.shape))

    def sample_points(self, n, rng):
        return self.points[rng.integers(0, self.points.size, n)]

    def zero_set(self):
        return ZeroSet((), False)

    def to_dict(self):
        return {"kind": self.kind,
                "points": [[float(p.real), float(p.imag)] for p in self.points]}


def stieltjes(measure, z):
    """Cauchy-Stieltjes transform ``m_mu(z)``."""
    return measure.stieltjes(z)


def density(measure, z):
    """Planar density ``f(z)``; raises for singular measures."""
    return measure.density(z)


def sample(measure, n, seed):
    """Draw ``n`` iid roots from ``measure`` with the Philox stream for ``seed``."""
    return measure.sample(n, seed)


def zero_set(measure):
    """Known zeros of ``m_mu``."""
    return measure.zero_set()


_KINDS = {
    "uniform_disk": UniformDisk,
    "two_disks": TwoDisks,
    "complex_gaussian": ComplexGaussian,
    "unit_circle": UnitCircle,
    "empirical": Empirical,
}


def _complex_field(v):
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    if isinstance(v, str):
        return complex(v.replace(" ", ""))
    return complex(v)


def measure_from_dict(spec):
    """Build a measure from its ``{"kind": ..., params}`` config form."""
    if isinstance(spec, str):
        spec = {"kind": spec}
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind not in _KINDS:
        raise ValueError(f"unknown measure kind {kind!r}; expected one of {sorted(_KINDS)}")
    if kind == "uniform_disk":
        return UniformDisk(_complex_field(spec.get("center", 0)), float(spec.get("radius", 1.0)))
    if kind == "empirical":
        if "points" not in spec:
            raise ValueError("empirical measure needs 'points'")
        return Empirical(numpy.array([_complex_field(p) for p in spec["points"]]))
    return _KINDS[kind]()
