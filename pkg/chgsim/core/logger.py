"""Logging configuration using structlog."""

import logging
import sys
from typing import Any, List, Optional

import structlog

from chgsim.config import settings

# shared by both renderers
_PROCESSORS: List[Any] = [
    structlog.contextvars.merge_contextvars,
    structlog.stdlib.filter_by_level,
    structlog.processors.TimeStamper(fmt="iso"),
    structlog.stdlib.add_logger_name,
    structlog.stdlib.add_log_level,
    structlog.stdlib.PositionalArgumentsFormatter(),
    structlog.processors.StackInfoRenderer(),
    structlog.processors.format_exc_info,
    structlog.processors.UnicodeDecoder(),
]


def setup_logger(level: Optional[str] = None, fmt: Optional[str] = None) -> None:
    """
    Configure structured logging for the toolkit.

    Args:
        level: Log level name, defaults to settings.LOG_LEVEL
        fmt: "json" or "console", defaults to settings.LOG_FORMAT
    """
    level_name = (level or settings.LOG_LEVEL).upper()
    renderer = (
        structlog.processors.JSONRenderer()
        if (fmt or settings.LOG_FORMAT) == "json"
        else structlog.dev.ConsoleRenderer(colors=sys.stderr.isatty())
    )

    # stdout carries command reports
    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=getattr(logging, level_name), force=True)

    structlog.configure(
        processors=[*_PROCESSORS, renderer],
        wrapper_class=structlog.stdlib.BoundLogger,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=False,
    )


def bind_run_context(command: str, config_path: str, **extra: Any) -> None:
    """Attach the command and config file to every log line of this run."""
    structlog.contextvars.clear_contextvars()
    structlog.contextvars.bind_contextvars(command=command, config=config_path, **extra)


# Create logger instance
logger = structlog.get_logger()
