"""Runtime settings resolved from the environment."""

import logging
import os
from dataclasses import dataclass

from .core import InvalidArgumentError

THREADS_ENV = "PAIRCORR_THREADS"
LOG_LEVEL_ENV = "PAIRCORR_LOG_LEVEL"
ENERGY_MAX_N_ENV = "PAIRCORR_ENERGY_MAX_N"

DEFAULT_ENERGY_MAX_N = 1_000_000
LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


def _int_from_env(name: str, default: int, minimum: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise InvalidArgumentError(f"{name} must be an integer, got {raw!r}")
    if value < minimum:
        raise InvalidArgumentError(f"{name} must be >= {minimum}, got {value}")
    return value


@dataclass(frozen=True)
class Settings:
    """Process-wide knobs. ``threads == 0`` leaves the numba default in place."""

    threads: int = 0
    log_level: str = "WARNING"
    energy_max_n: int = DEFAULT_ENERGY_MAX_N

    @classmethod
    def from_env(cls) -> "Settings":
        level = os.environ.get(LOG_LEVEL_ENV, "WARNING").strip().upper() or "WARNING"
        if not isinstance(logging.getLevelName(level), int):
            raise InvalidArgumentError(f"{LOG_LEVEL_ENV} is not a logging level: {level!r}")
        return cls(
            threads=_int_from_env(THREADS_ENV, 0, 0),
            log_level=level,
            energy_max_n=_int_from_env(ENERGY_MAX_N_ENV, DEFAULT_ENERGY_MAX_N, 1),
        )


def configure_logging(level: str) -> None:
    logging.basicConfig(level=getattr(logging, level), format=LOG_FORMAT)
