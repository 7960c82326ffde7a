"""
Logger module for the entanglement network toolkit.

Provides consistent logging across the packages, with rich formatting when
rich is installed.
"""

import logging
import os
import sys
from typing import Optional

# Try to import rich
try:
    from rich.console import Console
    from rich.logging import RichHandler
    HAS_RICH = True
except ImportError:
    HAS_RICH = False

PLAIN_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def resolve_level(level: Optional[str] = None, verbose: bool = False) -> int:
    """
    Work out the numeric logging level.

    Args:
        level: Explicit level name, wins over everything else
        verbose: Force DEBUG when no explicit level is given

    Returns:
        Numeric level (INFO when the name is unknown)
    """
    if level is None:
        level = os.environ.get("LOG_LEVEL", "INFO")
        if verbose:
            level = "DEBUG"
    return getattr(logging, level.upper(), logging.INFO)


def setup_logger(
    name: str,
    level: Optional[str] = None,
    verbose: bool = False
) -> logging.Logger:
    """
    Set up a logger with optional rich formatting.

    Handlers write to stderr so CSV output on stdout stays clean.

    Args:
        name: Logger name
        level: Logging level (overrides environment variable and verbose flag)
        verbose: Whether to use DEBUG level

    Returns:
        Configured logger
    """
    numeric_level = resolve_level(level, verbose)

    if HAS_RICH:
        handler: logging.Handler = RichHandler(
            console=Console(stderr=True),
            rich_tracebacks=True,
            show_time=True,
            show_path=False
        )
        handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
    else:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(PLAIN_FORMAT))

    root = logging.getLogger()
    root.handlers = [handler]
    root.setLevel(numeric_level)

    logger = logging.getLogger(name)
    logger.setLevel(numeric_level)
    logger.debug("Logging configured at %s", logging.getLevelName(numeric_level))
    return logger


def get_logger(
    name: str,
    level: Optional[str] = None,
    verbose: bool = False
) -> logging.Logger:
    """
    Get a logger with the specified name.

    Args:
        name: Logger name
        level: Logging level
        verbose: Whether to use DEBUG level

    Returns:
        Logger instance
    """
    return setup_logger(name, level, verbose)
