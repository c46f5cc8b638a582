"""
Exception hierarchy for jsrlab.

Every error carries an actionable message. Concrete errors also derive from the
closest built-in exception so callers may catch ``ValueError`` or
``RuntimeError`` without importing this module.

The CLI maps each family to a distinct process exit code (see ``EXIT_CODES``).
"""


class JSRLabError(Exception):
    """Base class for all jsrlab errors."""

    exit_code: int = 1


# ============================================================================
# Input / configuration errors (exit code 2)
# ============================================================================

class ConfigError(JSRLabError, ValueError):
    """Experiment configuration is malformed or names unknown entries."""

    exit_code = 2


class InvalidWordError(JSRLabError, ValueError):
    """A switching word references a matrix index outside the set."""

    exit_code = 2


class DomainError(JSRLabError, ValueError):
    """An argument lies outside the domain of a calculator or operation."""

    exit_code = 2


class ShapeError(JSRLabError, ValueError):
    """Vector or matrix dimensions do not match."""

    exit_code = 2


# ============================================================================
# Numerical failures (exit code 3)
# ============================================================================

class NumericError(JSRLabError, RuntimeError):
    """Non-finite data or a numerical routine that failed to converge."""

    exit_code = 3


class InfeasibleLPError(NumericError):
    """Linear program has no feasible point."""


class UnboundedLPError(NumericError):
    """Linear program objective is unbounded below."""


class UnboundedDirectionError(NumericError):
    """Gauge is infinite: the target lies outside the cone of the vertices."""


class PolytopeBuildError(NumericError):
    """No usable sample remained to build a polytope norm."""


# ============================================================================
# Budget exhaustion (exit code 4)
# ============================================================================

class EnumerationTooLargeError(JSRLabError, RuntimeError):
    """Product enumeration would exceed the configured cap."""

    exit_code = 4


class SearchCeilingError(JSRLabError, RuntimeError):
    """No Barvinok parameter k satisfies the inequality below the ceiling."""

    exit_code = 4


EXIT_CODES = {
    "success": 0,
    "unexpected": 1,
    "config": ConfigError.exit_code,
    "numeric": NumericError.exit_code,
    "budget": EnumerationTooLargeError.exit_code,
}


__all__ = [
    "JSRLabError",
    "ConfigError",
    "InvalidWordError",
    "DomainError",
    "ShapeError",
    "NumericError",
    "InfeasibleLPError",
    "UnboundedLPError",
    "UnboundedDirectionError",
    "PolytopeBuildError",
    "EnumerationTooLargeError",
    "SearchCeilingError",
    "EXIT_CODES",
]
