"""
cantor-dynamics

Exact finite-depth computation with group actions on boundaries of rooted
spherically homogeneous trees.
"""

import logging

from cantor.config import Config, get_config

__version__ = "0.3.0"


def configure_logging(config: Config = None) -> None:
    """Configure root logging once for command-line runs."""
    config = config or get_config()
    logging.basicConfig(
        level=getattr(logging, config.LOG_LEVEL.upper(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    )
