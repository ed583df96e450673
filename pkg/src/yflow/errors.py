"""Exception hierarchy shared by all yflow modules."""

from __future__ import annotations


class YFlowError(Exception):
    """Base class for every error raised by yflow."""


class ConfigurationError(YFlowError, ValueError):
    """Invalid grid, problem or scenario setup.

    ``path`` names the offending configuration field when one is known.
    """

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class DomainError(YFlowError, ValueError):
    """An argument lies outside the domain of the operation (e.g. u <= 0)."""


class PreconditionError(YFlowError, ValueError):
    """A documented precondition of a check does not hold."""


class NumericalError(YFlowError, ArithmeticError):
    """A linear solve failed (singular or non-finite system)."""


class StabilityError(YFlowError, ArithmeticError):
    """A time step lost positivity.

    Attributes
    ----------
    t : float
        Time the failing step started from.
    node : int
        Index of the first offending grid node.
    """

    def __init__(self, message: str, t: float, node: int):
        self.t = t
        self.node = node
        super().__init__(f"{message} (t={t:.6g}, node={node})")


class FatalInstabilityError(StabilityError):
    """Step halving was exhausted without recovering positivity."""


class ExtinctionError(YFlowError, ValueError):
    """A barrier was evaluated at or after its extinction time."""
