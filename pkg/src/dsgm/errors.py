"""Exception hierarchy shared by all dsgm modules."""

from __future__ import annotations


class DsgmError(Exception):
    """Base class for every error raised by dsgm."""


class DomainError(DsgmError, ValueError):
    """An entropy parameter or a configuration value lies outside its domain."""


class NotReducible(DsgmError):
    """The entropy family has no general (a, b) representation."""


class EvalError(DsgmError, ArithmeticError):
    """A quantity is singular at the supplied arguments (e.g. 0 ** -1)."""


class LengthMismatch(DsgmError, ValueError):
    """Two vectors that must have the same length do not."""


class Unsupported(DsgmError):
    """The requested divergence/form combination is not provided."""


class ModelDegenerate(EvalError):
    """The forward model produced a zero where a strictly positive value is required."""


class LineSearchFailed(DsgmError):
    """Armijo backtracking exhausted its budget without sufficient decrease.

    ``predicted`` is the first-order decrease ``|slope| * alpha`` at the
    first trial step, when known.
    """

    def __init__(self, message: str, predicted: float | None = None):
        super().__init__(message)
        self.predicted = predicted


class PreconditionerDegenerate(DsgmError):
    """A component of the preconditioner V is not safely positive."""
