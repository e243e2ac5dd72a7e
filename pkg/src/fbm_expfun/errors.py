"""Exception hierarchy shared by all modules.

The CLI maps :class:`DomainError` to exit code 2 and
:class:`AccuracyError` to exit code 3.
"""

from __future__ import annotations


class DomainError(ValueError):
    """Argument outside the domain where a formula or result applies."""


class BracketError(DomainError):
    """Root-finding bracket without a sign change."""


class MembershipError(DomainError):
    """A probing density makes one of the defining integrals diverge."""


class DegenerateError(DomainError):
    """Operation needs a nondegenerate (s > 0) log-normal bound."""


class NotCoveredError(DomainError):
    """Parameter configuration for which no bound is available."""


class AccuracyError(ArithmeticError):
    """Numerical routine failed to reach the requested tolerance.

    ``estimate`` carries the best value found so far and ``error`` the
    routine's own error estimate (``nan`` when unknown).
    """

    def __init__(self, message: str, estimate: float = float("nan"),
                 error: float = float("nan")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class DivergenceError(AccuracyError):
    """Integral judged divergent (non-finite or growing partial sums)."""
