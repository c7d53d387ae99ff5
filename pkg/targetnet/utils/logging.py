"""
Logging setup

structlog with a console renderer on stderr (or JSON lines). Library code
asks for a logger with `get_logger(component)` and never configures output
itself; the command line calls `configure_logging` once.
"""

import logging
import sys

import structlog

from ..core.errors import ConfigError

LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def configure_logging(level: str = "INFO", json_output: bool = False) -> None:
    """
    Configure structlog for the process

    Args:
        level: minimum level name (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        json_output: render JSON lines instead of the console format
    """
    name = str(level).upper()
    if name not in LEVELS:
        raise ConfigError("log_level", f"must be one of {', '.join(LEVELS)}, got {level!r}")

    renderer = structlog.processors.JSONRenderer() if json_output else structlog.dev.ConsoleRenderer(colors=False)
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(getattr(logging, name)),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


def get_logger(component: str, **bindings):
    """Lazy logger; resolves the current configuration on every call"""
    return structlog.get_logger(component=component, **bindings)
