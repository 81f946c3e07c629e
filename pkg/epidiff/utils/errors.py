"""Errors.

Exception hierarchy. The CLI maps each family onto a process exit code.

"""
from __future__ import annotations


class EpidiffError(Exception):
    """Base class for all errors raised by the package."""

    exit_code = 1


class ConfigError(EpidiffError):
    """Invalid or unreadable run configuration."""

    exit_code = 2


class DomainError(EpidiffError, ValueError):
    """Input outside the domain of an operation.

    Args:
        field (str):
            name of the offending parameter or input
        message (str):
            human readable explanation
    """

    exit_code = 2

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class NumericalError(EpidiffError):
    """Numerical failure, e.g. a covariance that cannot be repaired."""

    exit_code = 3


class IntegrationError(NumericalError):
    """Euler integration drove a compartment below the clamp tolerance."""


class ConvergenceError(NumericalError):
    """Optimiser stopped before meeting its tolerance."""


class DegenerateFilterError(EpidiffError):
    """No particle carried positive weight where a path or likelihood was required."""

    exit_code = 4


class DegenerateInferenceError(DegenerateFilterError):
    """Chain cannot start because the filter is degenerate at the initial parameters."""
