"""
Roots and critical points of random polynomials.

Build ``p(z) = prod (z - X_j)`` from sampled or supplied roots, compute all
critical points from the roots alone, and measure how closely each critical
point follows its root.
"""

from .errors import (ConditioningError, ConvergenceError, DegreeError, InsufficientDataError,
                     MeasureDomainError, NearZeroSetWarning, PoleError, RootPairError, SizeError,
                     UnsupportedMeasureError)
from .measures import (ComplexGaussian, Empirical, Measure, RadialCdf, TwoDisks, UniformDisk,
                       UnitCircle, ZeroSet, make_rng, measure_from_dict)
from .polynomial import LogDerivSums, RootSet, log_abs_poly, log_deriv_sums
from .critical import (CriticalSet, DetLocCertificate, PredictedCP, SolverOptions, certify,
                       nearest_cp, predict, solve)
from .transport import PairingReport, augment, greedy_pair, wasserstein1
from .statistics import CubicBump

__version__ = "0.1.0"
