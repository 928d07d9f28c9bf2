"""Exception types shared across the package."""


class WaldkitError(Exception):
    """Base class for all package-specific errors."""


class ParseError(WaldkitError):
    """Syntax or validation error in restriction-system text, with position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class SingularAtPoint(WaldkitError):
    """The Wald statistic is undefined: G(theta_hat) V G(theta_hat)' is
    numerically singular at the evaluation point."""


class SubmatrixBudgetError(WaldkitError):
    """The number of q-column selections exceeds the configured cap."""


class RankDeficiencyError(WaldkitError):
    """A matrix required to have full generic row rank does not."""


class RedrawLimitError(WaldkitError):
    """Too many Monte Carlo draws hit a numerically singular quadratic form."""


class DivergentLawError(WaldkitError):
    """No finite limit law or bound exists (deficient-rank classification)."""
