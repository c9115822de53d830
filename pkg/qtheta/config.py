import os
from dataclasses import dataclass

from dotenv import load_dotenv

from qtheta.errors import ConfigError

load_dotenv()

LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}


@dataclass
class Settings:
    tail_tolerance: float
    quad_half_width: float
    quad_points: int
    seed: int
    sample_points: int
    log_level: str
    schema_version: int


def _parse_float(name: str, default: str) -> float:
    raw = os.getenv(name, default).strip() or default
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{name} must be a number, got {raw!r}.") from None


def _parse_int(name: str, default: str) -> int:
    raw = os.getenv(name, default).strip() or default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}.") from None


def get_settings() -> Settings:
    tail_tolerance = _parse_float("QTHETA_TAIL_TOLERANCE", "1e-10")
    quad_half_width = _parse_float("QTHETA_QUAD_HALF_WIDTH", "6.0")
    quad_points = _parse_int("QTHETA_QUAD_POINTS", "120")
    seed = _parse_int("QTHETA_SEED", "20240607")
    sample_points = _parse_int("QTHETA_SAMPLE_POINTS", "5")
    log_level = (os.getenv("QTHETA_LOG_LEVEL", "WARNING") or "WARNING").strip().upper()
    schema_version = _parse_int("QTHETA_SCHEMA_VERSION", "1")

    if not 0 < tail_tolerance < 1:
        raise ConfigError("QTHETA_TAIL_TOLERANCE must be in (0, 1).")
    if quad_half_width <= 0:
        raise ConfigError("QTHETA_QUAD_HALF_WIDTH must be positive.")
    if quad_points < 2:
        raise ConfigError("QTHETA_QUAD_POINTS must be at least 2.")
    if sample_points < 1:
        raise ConfigError("QTHETA_SAMPLE_POINTS must be at least 1.")
    if log_level not in LOG_LEVELS:
        raise ConfigError(f"QTHETA_LOG_LEVEL must be one of {sorted(LOG_LEVELS)}.")

    return Settings(
        tail_tolerance=tail_tolerance,
        quad_half_width=quad_half_width,
        quad_points=quad_points,
        seed=seed,
        sample_points=sample_points,
        log_level=log_level,
        schema_version=schema_version,
    )
