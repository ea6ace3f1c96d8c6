"""Exception hierarchy.

Two branches matter for scripting: :class:`ValidationError` (the request
itself is malformed or outside the theory's hypotheses — CLI exit code 1)
and :class:`NumericsError` (the request was legal but a numerical process
failed or a tolerance was not attained — CLI exit code 2).
"""
from __future__ import annotations


class EvoscalarError(Exception):
    """Base class for all package errors."""


class ValidationError(EvoscalarError, ValueError):
    """Domain/argument violation: bad parameters, malformed configs."""


class PoleError(ValidationError):
    """Gamma function evaluated at a non-positive integer."""


class SupercriticalError(ValidationError):
    """Nonlinearity exponent at or above the critical threshold 1 + p0/lambda."""


class DegenerateWindowError(ValidationError):
    """Fit or measurement window where the data is identically degenerate."""


class UnboundedSupremumError(ValidationError):
    """Requested decay bound does not exist: 1/lambda < 1/p - 1/q."""


class AliasingError(ValidationError):
    """Requested frequency not resolvable on the grid (N < 2 max |k|)."""


class NumericsError(EvoscalarError, RuntimeError):
    """Numerical failure at runtime (nonconvergence, accuracy loss)."""


class AccuracyError(NumericsError):
    """Internal error estimate exceeds the requested tolerance."""


class ConvergenceError(NumericsError):
    """A truncated series or iteration hit its cap before converging."""


class HorizonError(NumericsError):
    """Query beyond the enumerated/truncated range of a spectral model."""


class IllPosedError(NumericsError):
    """First-kind Volterra solve with a vanishing leading quadrature weight."""


class DivergenceError(NumericsError):
    """Fixed-point iteration diverges (growing increments or overflow)."""
