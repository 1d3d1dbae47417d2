"""
Logging setup for rotorxy.

Rich console output on stderr, so progress of long sweeps never mixes with the JSON
and tables written to stdout.
"""

from __future__ import annotations

import logging

from rich.console import Console
from rich.logging import RichHandler


def setup_logging(level: str = "INFO") -> None:
    """
    Configure logging for rotorxy.

    Args:
        level: The logging level (DEBUG, INFO, WARNING, ERROR).
    """
    handler = RichHandler(
        console=Console(stderr=True),
        show_time=True,
        show_path=False,
        markup=False,
        rich_tracebacks=True,
    )

    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(message)s",
        handlers=[handler],
        force=True,
    )

    # numba logs every compilation pass at DEBUG
    logging.getLogger("numba").setLevel(logging.WARNING)
    logging.getLogger("matplotlib").setLevel(logging.WARNING)
