# mirror_mass/errors.py

from __future__ import annotations

from typing import Any, Optional, Tuple


class MirrorMassError(Exception):
    """Root of every error raised by the package."""


class TrajectoryError(MirrorMassError, ValueError):
    """Invalid family parameters, evaluation outside the domain or non-finite derivatives."""


class SmoothnessError(TrajectoryError):
    """A strong-form quantity was requested across a velocity jump."""


class RenormalizationError(MirrorMassError, ValueError):
    """The mass shift cannot be anchored: the trajectory has no uniform past."""


class NegativeMassError(MirrorMassError):
    """Backreaction evolution reached a non-positive (effective) mass."""

    def __init__(self, message: str, *, tau: float, m_total: float):
        super().__init__(message)
        self.tau = tau
        self.m_total = m_total


class ConvergenceError(MirrorMassError):
    """Quadrature or stepping failed to meet the requested tolerance."""

    def __init__(self, message: str, *, result: Optional[Any] = None):
        super().__init__(message)
        self.result = result


class ExpressionError(MirrorMassError, ValueError):
    """
    Base for profile-expression failures.
    `offset` is a byte offset into the UTF-8 source; `expected` lists the tokens
    that would have been accepted there (empty when not applicable).
    """

    def __init__(
        self, message: str, *, offset: int = 0, expected: Tuple[str, ...] = ()
    ):
        super().__init__(message)
        self.offset = offset
        self.expected = tuple(expected)

    def __str__(self) -> str:
        base = f"{self.args[0]} (at byte {self.offset})"
        if self.expected:
            base += f"; expected one of: {', '.join(self.expected)}"
        return base


class ExpressionSyntaxError(ExpressionError):
    pass


class UnknownIdentifierError(ExpressionError):
    pass


class ArityError(ExpressionError):
    pass


class EvaluationDomainError(ExpressionError):
    pass
