"""Exception types shared across the package."""

from __future__ import annotations


class CwError(Exception):
    """Base class for all package errors."""


class SchemaError(CwError):
    """Malformed surface/solution JSON or CSV input."""


class QuadratureError(CwError):
    """Adaptive quadrature did not converge; carries the best estimate."""

    def __init__(self, message: str, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class AxisSingularityError(CwError):
    """Evaluation of the parallel curvature on the axis without a pole limit."""


class ParameterRangeError(CwError):
    """Argument outside a documented validity range."""


class SolverError(CwError):
    """Newton iteration failed; carries the last iterate."""

    def __init__(self, message: str, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class ConstructionError(CwError):
    """Assembled profile chain violates a continuity/tangency tolerance."""


class AmplitudeError(CwError):
    """Bump amplitude breaks embeddedness or confinement."""


class AreaTargetError(CwError):
    """Area tuning target unreachable for the given bump support."""


class NotConfinedError(CwError):
    """Bound requested on a surface that is not contained in the unit ball."""
