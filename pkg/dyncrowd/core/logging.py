"""
Logging Configuration

Structured logging for dyncrowd: structlog on top of the standard logging
module, rendered to stderr so stdout stays free for command output.
"""

import logging
import os
import sys
from typing import Optional

import structlog
from structlog.stdlib import LoggerFactory

LOG_ENV_VAR = "DYNCROWD_LOG"
DEFAULT_LEVEL = "WARNING"


def resolve_level(level: Optional[str] = None) -> int:
    """Resolve a level name, falling back to $DYNCROWD_LOG and then WARNING."""
    name = level or os.environ.get(LOG_ENV_VAR) or DEFAULT_LEVEL
    resolved = logging.getLevelName(name.strip().upper())
    return resolved if isinstance(resolved, int) else logging.WARNING


def setup_logging(level: Optional[str] = None, format_type: str = "text") -> structlog.stdlib.BoundLogger:
    """
    Setup structured logging.

    Args:
        level (str): Logging level (DEBUG, INFO, WARNING, ERROR). None reads
            the DYNCROWD_LOG environment variable.
        format_type (str): "json" for one JSON object per line, "text" for
            the console renderer

    Returns:
        structlog.stdlib.BoundLogger: Configured root logger
    """
    log_level = resolve_level(level)

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            structlog.processors.JSONRenderer() if format_type == "json" else structlog.dev.ConsoleRenderer(colors=False),
        ],
        context_class=dict,
        logger_factory=LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )

    root = logging.getLogger()
    for handler in root.handlers[:]:
        root.removeHandler(handler)

    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(log_level)
    handler.setFormatter(logging.Formatter("%(message)s"))
    root.addHandler(handler)
    root.setLevel(log_level)

    return structlog.get_logger("dyncrowd")


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    """
    Get a logger instance for a specific module.

    Args:
        name (str): Logger name (usually __name__)

    Returns:
        structlog.stdlib.BoundLogger: Logger instance
    """
    return structlog.get_logger(name)
