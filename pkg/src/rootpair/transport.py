"""
Wasserstein-1 distance between root and critical-point clouds.

There are ``n`` roots but only ``n - 1`` critical points, so the critical
points are padded with one atom at the root mean before matching.
"""

from dataclasses import dataclass
import math

import numpy
from scipy.optimize import linear_sum_assignment

from .critical import CriticalSet, solve
from .errors import SizeError
from .measures import sample
from .polynomial import RootSet, as_points

__all__ = [
    "PairingReport",
    "EXACT_CAP",
    "augment",
    "wasserstein1",
    "greedy_pair",
    "scaling_record",
    "ScalingRow",
]

EXACT_CAP = 5000


@dataclass(frozen=True)
class PairingReport:
    """
    A perfect matching between two equal-size point sets.

    Attributes
    ----------
    assignment : numpy.ndarray
        ``assignment[i]`` is the index in the second set matched to point ``i``.
    distances : numpy.ndarray
        ``|a_i - b_{assignment[i]}|``.
    total_cost : float
    w1 : float
        ``total_cost / n``.
    augmented : bool
        Whether the second set had the root-mean atom appended.
    """

    assignment: numpy.ndarray
    distances: numpy.ndarray
    total_cost: float
    w1: float
    augmented: bool = False


def _points(x):
    if isinstance(x, (RootSet, CriticalSet)):
        return x.points
    return as_points(x)


def augment(cps, roots):
    """Critical points followed by one atom at the root mean (length ``n``)."""
    r = roots if isinstance(roots, RootSet) else RootSet(roots)
    return numpy.concatenate([_points(cps), [r.mean]])


def _check_sizes(a, b):
    if a.size != b.size:
        raise ValueError(f"size mismatch: {a.size} vs {b.size}")
    if a.size < 1:
        raise ValueError("need at least one point")


def _report(a, b, assignment, augmented):
    dist = numpy.abs(a - b[assignment])
    total = float(math.fsum(dist))
    return PairingReport(assignment, dist, total, total / a.size, augmented)


def wasserstein1(a, b, augmented=False):
    """
    Exact W1 between the uniform empirical measures on ``a`` and ``b``.

    Solved as a min-cost perfect matching on the Euclidean cost matrix with
    ``scipy.optimize.linear_sum_assignment``, a Jonker-Volgenant variant.

    Raises
    ------
    SizeError
        Above ``EXACT_CAP`` points; use :func:`greedy_pair` there.
    """
    a = _points(a)
    b = _points(b)
    _check_sizes(a, b)
    if a.size > EXACT_CAP:
        raise SizeError(f"exact matching is capped at n = {EXACT_CAP} (got {a.size}); "
                        "use greedy_pair for an upper bound")
    cost = numpy.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    assignment = numpy.empty(a.size, dtype=numpy.int64)
    assignment[rows] = cols
    return _report(a, b, assignment, augmented)


def greedy_pair(roots, targets, augmented=False):
    """
    Greedy matching: repeatedly take the globally closest unused pair.

    Ties break on (distance, root index, target index), so the result is
    deterministic. The cost is an upper bound on the exact W1 cost.
    """
    a = _points(roots)
    b = _points(targets)
    _check_sizes(a, b)
    n = a.size
    cost = numpy.abs(a[:, None] - b[None, :]).ravel()
    ii, jj = numpy.divmod(numpy.arange(n * n), n)
    order = numpy.lexsort((jj, ii, cost))
    assignment = numpy.full(n, -1, dtype=numpy.int64)
    used = numpy.zeros(n, dtype=bool)
    left = n
    for flat in order:
        i = ii[flat]
        j = jj[flat]
        if assignment[i] < 0 and not used[j]:
            assignment[i] = j
            used[j] = True
            left -= 1
            if left == 0:
                break
    return _report(a, b, assignment, augmented)


@dataclass(frozen=True)
class ScalingRow:
    n: int
    seed: int
    w1: float
    eta: float
    normalized: float


def scaling_record(measure, n_list, seeds, options=None):
    """
    Sample, solve, augment and match for every ``(n, seed)`` cell.

    ``normalized`` is ``n * w1 / (eta * (ln n)^9)``, the quantity the
    polylogarithmic transport bound keeps bounded.

    Returns
    -------
    rows : list of ScalingRow
        One per cell, ordered by ``n`` then seed.
    medians : dict
        ``n -> (median w1, median eta, median n*w1/ln n)``.
    """
    rows = []
    medians = {}
    for n in n_list:
        n = int(n)
        if n < 8:
            raise ValueError("scaling_record needs n >= 8")
        cell = []
        for seed in seeds:
            roots = sample(measure, n, seed)
            cps = solve(roots, options)
            rep = wasserstein1(roots, augment(cps, roots), augmented=True)
            norm = n * rep.w1 / (roots.eta * math.log(n) ** 9)
            row = ScalingRow(n, int(seed), rep.w1, roots.eta, norm)
            rows.append(row)
            cell.append(row)
        medians[n] = (
            float(numpy.median([r.w1 for r in cell])),
            float(numpy.median([r.eta for r in cell])),
            float(numpy.median([n * r.w1 / math.log(n) for r in cell])),
        )
    return rows, medians
