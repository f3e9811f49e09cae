"""
Quantum trajectory utility modules.

This package contains logging, settings, the error hierarchy and the
table writers.
"""

# Import commonly used functions for convenience
from .errors import ConfigError, NumericError, QuantumHJError
from .logging import get_logger, setup_logging
from .settings import config

__all__ = [
    # Logging
    "setup_logging",
    "get_logger",
    # Settings
    "config",
    # Errors
    "QuantumHJError",
    "ConfigError",
    "NumericError",
]
