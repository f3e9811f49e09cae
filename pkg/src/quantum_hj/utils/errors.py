"""
Exception hierarchy.

Configuration problems (bad input, inadmissible domain) and numerical failures
are kept apart so the command line can map them to distinct exit codes.
"""


class QuantumHJError(Exception):
    """Base class for every error raised by the library."""


class ConfigError(QuantumHJError):
    """Invalid user input or run configuration (exit code 2)."""


class DomainError(ConfigError):
    """Argument outside the admissible domain of an operation."""


class NonPositiveDefinite(ConfigError):
    """Microstate (a, b, c) violates a > 0, b > 0, ab - c^2/4 > 0."""


class NoRealSolution(ConfigError):
    """Initial values admit no positive-definite microstate."""


class NumericError(QuantumHJError):
    """Numerical failure during evaluation (exit code 3)."""


class AiryRangeError(NumericError, OverflowError):
    """Unscaled Airy value outside double range; use airy_scaled instead."""


class ConvergenceError(NumericError):
    """Integrator step failed the halving convergence gate."""


class GaugeMismatchError(NumericError):
    """Numerically integrated basis Wronskian drifted beyond tolerance."""


class QuadratureError(NumericError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved tolerance {achieved:.3e})")
        self.achieved = achieved


class BracketError(NumericError):
    """Root or width search could not bracket a sign change."""
