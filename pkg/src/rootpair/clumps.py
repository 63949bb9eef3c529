"""
Clumps: connected components of a union of small balls around the roots.

Ball radii shrink like ``(ln n)^3 / (n |m_mu(x)|)`` away from the zero set of
``m_mu`` and are floored near it. Inside each clump the number of roots and
the number of critical points should agree.
"""

from dataclasses import dataclass, field
import json
import math

import numpy

from .critical import CriticalSet
from .polynomial import RootSet, as_points

__all__ = [
    "UnionFind",
    "Clump",
    "ClumpSet",
    "ClumpCount",
    "CountReport",
    "clump_radius",
    "eligibility_floor",
    "build",
    "count_report",
]


class UnionFind(object):
    """Disjoint sets over ``0..n-1`` with path halving and union by size."""

    def __init__(self, n):
        self.parent = numpy.arange(n)
        self.size = numpy.ones(n, dtype=numpy.int64)

    def find(self, i):
        parent = self.parent
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return int(i)

    def union(self, i, j):
        a = self.find(i)
        b = self.find(j)
        if a == b:
            return False
        if self.size[a] < self.size[b]:
            a, b = b, a
        self.parent[b] = a
        self.size[a] += self.size[b]
        return True

    def groups(self):
        """Member lists, each sorted, ordered by smallest member."""
        labels = numpy.array([self.find(i) for i in range(self.parent.size)])
        out = {}
        for i, lab in enumerate(labels):
            out.setdefault(int(lab), []).append(i)
        return sorted(out.values(), key=lambda g: g[0])


@dataclass(frozen=True)
class Clump:
    root_indices: tuple
    cp_indices: tuple
    radii: tuple
    is_pair_eligible: bool
    diameter: float

    @property
    def matched(self):
        return len(self.root_indices) == len(self.cp_indices)


@dataclass(frozen=True)
class ClumpSet:
    """
    Clumps of one root configuration.

    ``m_abs`` holds ``|m_mu(X_j)|`` per root and ``threshold`` the eligibility
    cut used, so reports can be recomputed without the measure.
    """

    components: tuple
    unassigned_cps: tuple
    n: int = 0
    roots: numpy.ndarray = field(default=None, repr=False)
    cps: numpy.ndarray = field(default=None, repr=False)
    m_abs: numpy.ndarray = field(default=None, repr=False)
    threshold: float = 0.0

    def __len__(self):
        return len(self.components)


def eligibility_floor(n):
    """The ``(ln n)^4 / sqrt(n)`` cut that defines pair-eligible roots."""
    return math.log(n) ** 4 / math.sqrt(n)


def clump_radius(measure, x, n):
    """
    Ball radius ``(ln n)^3 / (n * max(|m_mu(x)|, (ln n)^4 / sqrt(n)))``.

    Accepts a scalar or an array of points.
    """
    n = int(n)
    if n < 8:
        raise ValueError("clump_radius needs n >= 8")
    m_abs = numpy.abs(numpy.asarray(measure.stieltjes(x)))
    return _radius_from_m(m_abs, n)


def _radius_from_m(m_abs, n):
    L = math.log(n)
    out = L ** 3 / (n * numpy.maximum(m_abs, eligibility_floor(n)))
    return float(out) if numpy.ndim(out) == 0 else out


def _grid(points, cell):
    keys = numpy.floor(points.real / cell).astype(numpy.int64), \
        numpy.floor(points.imag / cell).astype(numpy.int64)
    table = {}
    for i, key in enumerate(zip(keys[0].tolist(), keys[1].tolist())):
        table.setdefault(key, []).append(i)
    return table, keys


def _union_diameter(pts, radii):
    # diameter of a union of discs: max over pairs of |c_i - c_j| + r_i + r_j
    best = 0.0
    for s in range(0, pts.size, 1024):
        d = numpy.abs(pts[s:s + 1024, None] - pts[None, :]) + radii[s:s + 1024, None] + radii[None, :]
        best = max(best, float(d.max()))
    return best


def build(roots, cps, measure, threshold=None, radius_scale=1.0):
    """
    Group roots into clumps and attach critical points to them.

    Two roots are joined when their open balls intersect,
    ``|X_i - X_j| < r_i + r_j``. A critical point belongs to the clump of the
    nearest centre among the balls that contain it, and is unassigned if no
    ball does. A clump is pair-eligible when every member root has
    ``|m_mu(X)| > threshold`` (default ``(ln n)^4 / sqrt(n)``).

    Parameters
    ----------
    roots : RootSet or array_like
    cps : CriticalSet or array_like
    measure : Measure
    threshold : float, optional
        Override of the eligibility cut, for diagnostics at small ``n``.
    radius_scale : float
        Multiplier on every ball radius.

    Returns
    -------
    ClumpSet
    """
    pts = roots.points if isinstance(roots, RootSet) else as_points(roots)
    cp = cps.points if isinstance(cps, CriticalSet) else as_points(cps)
    n = pts.size
    if n < 8:
        raise ValueError("clump construction needs n >= 8")
    m_abs = numpy.abs(numpy.asarray(measure.stieltjes(pts), dtype=numpy.complex128))
    radii = radius_scale * _radius_from_m(m_abs, n)
    cut = eligibility_floor(n) if threshold is None else float(threshold)

    cell = float(radii.max())
    table, (kx, ky) = _grid(pts, cell)
    uf = UnionFind(n)
    for i in range(n):
        for dx in (-2, -1, 0, 1, 2):
            for dy in (-2, -1, 0, 1, 2):
                for j in table.get((int(kx[i]) + dx, int(ky[i]) + dy), ()):
                    if j > i and abs(pts[i] - pts[j]) < radii[i] + radii[j]:
                        uf.union(i, j)
    groups = uf.groups()
    label = numpy.empty(n, dtype=numpy.int64)
    for g, members in enumerate(groups):
        label[members] = g

    owned = [[] for _ in groups]
    unassigned = []
    for c, w in enumerate(cp):
        cx = int(numpy.floor(w.real / cell))
        cy = int(numpy.floor(w.imag / cell))
        best = -1
        best_d = numpy.inf
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for j in table.get((cx + dx, cy + dy), ()):
                    d = abs(w - pts[j])
                    if d < radii[j] and (d < best_d or (d == best_d and j < best)):
                        best, best_d = j, d
        if best < 0:
            unassigned.append(c)
        else:
            owned[label[best]].append(c)

    comps = []
    for g, members in enumerate(groups):
        idx = numpy.asarray(members)
        comps.append(Clump(
            root_indices=tuple(members),
            cp_indices=tuple(owned[g]),
            radii=tuple(float(r) for r in radii[idx]),
            is_pair_eligible=bool(numpy.all(m_abs[idx] > cut)),
            diameter=_union_diameter(pts[idx], radii[idx]),
        ))
    return ClumpSet(tuple(comps), tuple(unassigned), n, pts, cp, m_abs, cut)


@dataclass(frozen=True)
class ClumpCount:
    roots: int
    cps: int
    matched: bool
    eligible: bool
    flagged: bool
    diameter: float

    def to_dict(self):
        return {"roots": self.roots, "cps": self.cps, "matched": self.matched,
                "eligible": self.eligible, "flagged": self.flagged, "diameter": self.diameter}


@dataclass(frozen=True)
class CountReport:
    """
    Per-clump counts and global summaries.

    ``matched_fraction`` is over pair-eligible clumps and is NaN when there
    are none. ``flagged`` lists eligible clumps whose counts disagree.
    ``max_distance_ratio`` is the largest ``|X - w| * n |m_mu(X)| / (ln n)^4``
    over eligible roots and their nearest critical point in the same clump.
    """

    clumps: tuple
    n_eligible: int
    matched_fraction: float
    flagged: tuple
    max_distance_ratio: float
    unassigned: int

    def to_jsonl(self, fh):
        """Write one JSON object per clump to an open text file."""
        for k, c in enumerate(self.clumps):
            rec = {"clump": k}
            rec.update(c.to_dict())
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def count_report(clumps):
    """Summarise root/critical-point counts clump by clump."""
    rows = []
    flagged = []
    eligible = 0
    matched = 0
    worst = 0.0
    L4 = math.log(clumps.n) ** 4 if clumps.n and clumps.n > 1 else 1.0
    for k, c in enumerate(clumps.components):
        ok = c.matched
        if c.is_pair_eligible:
            eligible += 1
            matched += ok
            if not ok:
                flagged.append(k)
            if c.cp_indices and clumps.roots is not None:
                ws = clumps.cps[list(c.cp_indices)]
                for i in c.root_indices:
                    d = float(numpy.min(numpy.abs(ws - clumps.roots[i])))
                    worst = max(worst, d * clumps.n * clumps.m_abs[i] / L4)
        rows.append(ClumpCount(len(c.root_indices), len(c.cp_indices), ok,
                               c.is_pair_eligible, c.is_pair_eligible and not ok, c.diameter))
    frac = matched / eligible if eligible else float("nan")
    return CountReport(tuple(rows), eligible, frac, tuple(flagged), worst,
                       len(clumps.unassigned_cps))
