"""
config
------

Loads index defaults from an optional .env file in the project root.

Recognised environment variables:
- HOC_DEFAULT_L      deepest tree level (default 16)
- HOC_DEFAULT_PSI    leaf split threshold (default 200)
- HOC_X_MAX, HOC_Y_MAX, HOC_T_MAX   upper domain bounds (10000, 10000, 5000)
- HOC_LOG_LEVEL      logging level name for the command line (INFO)
- HOC_DEFAULT_SEED   seed used when a command gets no --seed (42)

Values are read when load_settings() is called, not at import, so a bad
value surfaces as ConfigError where the caller handles errors.
"""

import logging
import os
from typing import TYPE_CHECKING, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict

from src.errors import ConfigError

if TYPE_CHECKING:
    from src.index.models import IndexConfig

load_dotenv()


class Settings(BaseModel):
    model_config = ConfigDict(frozen=True)

    default_L: int = 16
    default_psi: int = 200
    x_max: float = 10000.0
    y_max: float = 10000.0
    t_max: float = 5000.0
    log_level: str = "INFO"
    default_seed: int = 42


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}") from None


def _float_env(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{name} must be a number, got {raw!r}") from None


def load_settings() -> Settings:
    """Current environment values; raises ConfigError naming the bad variable."""
    level = os.getenv("HOC_LOG_LEVEL", "INFO").strip().upper() or "INFO"
    if not isinstance(logging.getLevelName(level), int):
        raise ConfigError(f"HOC_LOG_LEVEL must be a logging level name, got {level!r}")
    return Settings(
        default_L=_int_env("HOC_DEFAULT_L", 16),
        default_psi=_int_env("HOC_DEFAULT_PSI", 200),
        x_max=_float_env("HOC_X_MAX", 10000.0),
        y_max=_float_env("HOC_Y_MAX", 10000.0),
        t_max=_float_env("HOC_T_MAX", 5000.0),
        log_level=level,
        default_seed=_int_env("HOC_DEFAULT_SEED", 42),
    )


def default_index_config(settings: Optional[Settings] = None) -> "IndexConfig":
    """Domain [0, x_max] x [0, y_max] x [0, t_max] with the default L and psi."""
    from src.index.models import IndexConfig

    s = settings if settings is not None else load_settings()
    return IndexConfig.create(
        x_lo=0.0,
        x_hi=s.x_max,
        y_lo=0.0,
        y_hi=s.y_max,
        t_lo=0.0,
        t_hi=s.t_max,
        L=s.default_L,
        psi=s.default_psi,
    )
