"""Exception and warning types raised across the package."""


class RootPairError(Exception):
    """Base class for all package errors."""


class PoleError(RootPairError, ValueError):
    """Evaluation point coincides with a root (a pole of the log-derivative)."""

    def __init__(self, index, point=None):
        self.index = int(index)
        self.point = point
        msg = f"evaluation point coincides with root index {self.index}"
        if point is not None:
            msg += f" ({point!r})"
        super().__init__(msg)


class MeasureDomainError(RootPairError, ValueError):
    """A transform was requested at a point where it is not defined."""

    def __init__(self, point, reason):
        self.point = point
        super().__init__(f"m_mu undefined at {point!r}: {reason}")


class UnsupportedMeasureError(RootPairError, TypeError):
    """Operation is not available for this kind of measure."""


class SizeError(RootPairError, ValueError):
    """Input size outside the supported range."""


class DegreeError(RootPairError, ValueError):
    """Polynomial degree too small for the requested operation."""


class ConvergenceError(RootPairError, RuntimeError):
    """Iterative solver failed to converge."""

    def __init__(self, msg, worst_residual=float("nan"), index=-1):
        self.worst_residual = worst_residual
        self.index = index
        super().__init__(f"{msg} (worst residual {worst_residual:.3e} at iterate {index})")


class ConditioningError(RootPairError, ArithmeticError):
    """A denominator is too small for a trustworthy evaluation."""


class InsufficientDataError(RootPairError, ValueError):
    """Too few samples for a statistical comparison."""


class NearZeroSetWarning(UserWarning):
    """Prediction requested near the zero set of the Stieltjes transform."""
