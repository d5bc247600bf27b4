"""
Exception hierarchy for densify.

Every error carries the process exit code the CLI should use, so commands
can raise early and let ``densify.main`` turn the failure into a
single-line diagnostic.
"""

from __future__ import annotations


class DensifyError(Exception):
    """Base class for all densify failures."""

    exit_code = 1


# --------------------------------------------------------------------------- #
# invalid input (exit 2)                                                      #
# --------------------------------------------------------------------------- #
class InvalidArgumentError(DensifyError, ValueError):
    exit_code = 2


class ConfigError(InvalidArgumentError):
    pass


class EmptyDeploymentError(InvalidArgumentError):
    pass


class InconsistentRegionsError(InvalidArgumentError):
    """Raised when R_B < R_F < R_C does not hold for a configuration."""


# --------------------------------------------------------------------------- #
# numeric failures (exit 3)                                                   #
# --------------------------------------------------------------------------- #
class NumericError(DensifyError, ArithmeticError):
    exit_code = 3


class SingularityError(NumericError):
    """Unbounded pathloss evaluated at zero distance."""


class InsufficientDataError(NumericError):
    pass


class DegenerateDesignError(NumericError):
    pass


class ResourceLimitError(NumericError):
    pass


class CriticalDensityBoundaryError(NumericError):
    """The throughput argmax sits on the searched interval's edge."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])
