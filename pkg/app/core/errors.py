"""Error types raised by the numerical services.

Each error also derives from the closest builtin so that callers can catch
``ValueError`` / ``IndexError`` / ``RuntimeError`` without importing this module.
"""

from __future__ import annotations


class HyperApproxError(Exception):
    """Base class. ``exit_code`` is what the CLI returns for it."""

    exit_code = 3

    def __init__(self, message: str, *, operation: str | None = None):
        super().__init__(message)
        self.operation = operation

    def __str__(self) -> str:
        message = super().__str__()
        if self.operation:
            return f"{self.operation}: {message}"
        return message


class DomainError(HyperApproxError, ValueError):
    """Argument outside the region or parameter range of an operation."""


class IndexRangeError(HyperApproxError, IndexError):
    """Basis index (degree/order/flat index) out of range."""


class ConvergenceError(HyperApproxError, RuntimeError):
    """Iteration or adaptive quadrature failed to reach its tolerance."""


class NodeOnSingularityError(HyperApproxError, ValueError):
    """A quadrature node coincides with a kernel singularity."""


class DesignFileError(HyperApproxError, ValueError):
    """Malformed spherical design file or points off the sphere."""


class ExactnessError(HyperApproxError):
    """A rule failed its exactness verification; ``defect`` is the measured value."""

    def __init__(self, message: str, *, defect: float, operation: str | None = None):
        super().__init__(message, operation=operation)
        self.defect = defect


class MomentsTooShortError(HyperApproxError, ValueError):
    """Moment vector does not cover the degree required by the assembly."""


class SampleMismatchError(HyperApproxError, ValueError):
    """Sample vector does not align with the rule points."""


class ConfigError(HyperApproxError, ValueError):
    """Invalid CLI flags or config file."""

    exit_code = 2
