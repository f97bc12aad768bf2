"""Structured logging setup.

Library modules call ``structlog.get_logger(__name__)`` and never configure
anything themselves; the CLI (or a test) calls :func:`configure_logging` once.
"""

from __future__ import annotations

import logging
import sys

import structlog

_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}


def configure_logging(level: str = "INFO", *, colors: bool | None = None) -> None:
    """Route structlog output to stderr, filtered at ``level``.

    Args:
        level: Standard level name.
        colors: Force colored console output; defaults to "stderr is a TTY".
    """
    name = level.upper()
    if name not in _LEVELS:
        raise ValueError(f"unknown log level: {level!r}")
    if colors is None:
        colors = sys.stderr.isatty()
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso", utc=True),
            structlog.dev.ConsoleRenderer(colors=colors),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(getattr(logging, name)),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )
