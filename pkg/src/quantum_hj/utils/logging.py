"""
Logging configuration module.

This module provides structured logging setup with colored console output on
the diagnostic stream (stderr). Tables written to stdout never carry log lines.
"""

import logging
import sys
from typing import Any, Dict, Optional

import structlog
from colorama import Fore, Style, just_fix_windows_console

from .settings import config

LEVEL_STYLES = {
    "DEBUG": ("🔍", Fore.CYAN),
    "INFO": ("✓", Fore.GREEN),
    "WARNING": ("⚠", Fore.YELLOW),
    "ERROR": ("✗", Fore.RED),
    "CRITICAL": ("🔥", Fore.MAGENTA),
}


def custom_renderer(_, __, event_dict: Dict[str, Any]) -> str:
    """
    Render one event as `<time> <icon> <LEVEL> ▸ <event> │ key=value ...`.

    The first two arguments (logger, method name) are part of the structlog
    processor signature and are not used.
    """
    timestamp = event_dict.pop("timestamp", "")
    level = event_dict.pop("level", "").upper()
    event = event_dict.pop("event", "")

    icon, color = LEVEL_STYLES.get(level, ("•", ""))
    reset, dim, bold = Style.RESET_ALL, Style.DIM, Style.BRIGHT

    output = f"{dim}{timestamp}{reset} {color}{bold}{icon} {level}{reset} ▸ {event}"

    if event_dict:
        context = " ".join(f"{dim}{k}={reset}{v}" for k, v in event_dict.items())
        output += f" {dim}│{reset} " + context

    return output


def setup_logging(log_level: Optional[str] = None) -> None:
    """
    Configure structlog for diagnostic output.

    Sets up both Python's standard logging and structlog with colored
    level icons, timestamps (YYYY-MM-DD HH:MM:SS) and key-value context,
    all written to stderr.

    Args:
        log_level: Log level override. If None, uses config.log_level
                  (default: INFO). Valid: DEBUG, INFO, WARNING, ERROR, CRITICAL
    """
    if log_level is None:
        log_level = config.log_level
    level = getattr(logging, log_level.upper())

    just_fix_windows_console()
    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=level)

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="%Y-%m-%d %H:%M:%S"),
            custom_renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(level),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


def get_logger() -> structlog.BoundLogger:
    """
    Module-level logger for library and CLI code.

    Usage: logger.info("Sweep finished", points=30, max_residual=1e-12)
    Output: 2024-01-01 12:00:00 ✓ INFO ▸ Sweep finished │ points=30 max_residual=1e-12
    """
    return structlog.get_logger()
