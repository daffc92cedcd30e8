"""
Error types shared by the lab services.
The controller maps these onto process exit codes.
"""
from typing import Optional


class LabError(Exception):
    """Base class for every error raised deliberately by the lab."""


class CapacityError(LabError, ValueError):
    """An input exceeds a configured size or dimension limit."""


class DegenerateCovarianceError(LabError, ValueError):
    """A covariance matrix is singular where a non-degenerate one is required."""


class HyperplaneProximityError(LabError, ValueError):
    """Evaluation point lies too close to a coordinate hyperplane."""


class EmptySupportError(LabError, ValueError):
    """A model has no objects of the requested size."""


class InsufficientOrderError(LabError, ValueError):
    """A truncated series is too short for the requested coefficient."""


class GrammarParseError(LabError, ValueError):
    """Grammar text could not be parsed or violates a grammar invariant."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class QuadratureNonConvergence(LabError, RuntimeWarning):
    """Warning category for quadrature that stopped before reaching rel_tol."""
