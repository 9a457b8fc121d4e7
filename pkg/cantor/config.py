"""
Centralized configuration management for cantor-dynamics.
"""

import os
from dataclasses import dataclass
from fractions import Fraction

from dotenv import load_dotenv

load_dotenv()


@dataclass
class Config:
    """Base configuration class."""

    # Enumeration limits
    LEVEL_CAP: int = int(os.getenv("CANTOR_LEVEL_CAP", "1000000"))
    STATE_BOUND: int = int(os.getenv("CANTOR_STATE_BOUND", "64"))
    ORBIT_LIMIT: int = int(os.getenv("CANTOR_ORBIT_LIMIT", "100000"))

    # Default scale of a run
    WORKING_DEPTH: int = int(os.getenv("CANTOR_DEPTH", "12"))
    BALL_RADIUS: int = int(os.getenv("CANTOR_RADIUS", "3"))
    SCAN_MARGIN: int = int(os.getenv("CANTOR_MARGIN", "2"))
    ATOM_THRESHOLD: str = os.getenv("CANTOR_ATOM_THRESHOLD", "1/2")

    # Application settings
    SEED: int = int(os.getenv("CANTOR_SEED", "0"))
    LOG_LEVEL: str = os.getenv("CANTOR_LOG_LEVEL", "INFO")
    MAX_WORKERS: int = int(os.getenv("CANTOR_MAX_WORKERS", "2"))
    PRESETS_PATH: str = os.getenv("CANTOR_PRESETS", "presets/catalog.yaml")
    SCHEMA_VERSION: str = "1"

    @property
    def atom_threshold(self) -> Fraction:
        """Atom-candidate threshold as an exact rational."""
        return Fraction(self.ATOM_THRESHOLD)

    def validate(self) -> list[str]:
        """Validate configuration and return list of errors."""
        errors = []

        for name in ("LEVEL_CAP", "STATE_BOUND", "ORBIT_LIMIT", "MAX_WORKERS"):
            if getattr(self, name) <= 0:
                errors.append(f"{name} must be positive")

        if self.WORKING_DEPTH < 0 or self.BALL_RADIUS < 0 or self.SCAN_MARGIN < 0:
            errors.append("WORKING_DEPTH, BALL_RADIUS and SCAN_MARGIN must be non-negative")

        try:
            threshold = self.atom_threshold
        except (ValueError, ZeroDivisionError):
            errors.append(f"ATOM_THRESHOLD is not a rational: {self.ATOM_THRESHOLD!r}")
        else:
            if not 0 < threshold <= 1:
                errors.append("ATOM_THRESHOLD must lie in (0, 1]")

        return errors


@dataclass
class DefaultConfig(Config):
    """Interactive runs."""


@dataclass
class TestingConfig(Config):
    """Testing environment configuration."""
    LEVEL_CAP: int = 200000
    MAX_WORKERS: int = 2
    SEED: int = 0
    LOG_LEVEL: str = "DEBUG"


# Configuration mapping
config_by_name = {
    'default': DefaultConfig,
    'testing': TestingConfig,
}


def get_config(env_name: str = None) -> Config:
    """Get configuration based on profile name."""
    if env_name is None:
        env_name = os.getenv('CANTOR_PROFILE', 'default')

    return config_by_name.get(env_name, DefaultConfig)()
