"""Exception hierarchy shared by the package."""

from __future__ import annotations


class LogCouplingError(Exception):
    """Base class for all errors raised by this package."""


class SingularParameterError(LogCouplingError, ValueError):
    """Kac parameter at a pole of the parametrization (x = 0 or x = -1)."""


class NoNullVectorError(LogCouplingError):
    """The Verma module has no singular vector at the requested level."""


class AmbiguousNullVectorError(LogCouplingError):
    """The singular-vector space at the requested level is not one-dimensional."""


class NormalizationError(LogCouplingError):
    """The coefficient used to normalize a word vanishes."""


class InvalidTheoryError(LogCouplingError, ValueError):
    """The requested Kac point is not a supported logarithmic minimal model."""


class NotADiamondError(LogCouplingError):
    """The requested module is not a staggered diamond with a coupling."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


class LimitError(LogCouplingError, ArithmeticError):
    """The epsilon -> 0 limit cannot be evaluated (nonzero F(0), vanishing G'(0), ...)."""


class DegreeBoundError(LimitError):
    """Exact interpolation failed its residual check."""


class IdentificationError(LogCouplingError):
    """Expected states could not be located in a finite-size spectrum."""


class ConvergenceError(LogCouplingError, RuntimeError):
    """An iterative eigensolver did not converge."""
