"""
Runtime configuration for the random access toolkit.
Values are read from the environment (optionally seeded from a .env file).
"""

import logging
import os
import sys
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from utils.errors import InputError

DEFAULT_SEED = 0x5EED

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class Settings(BaseModel):
    model_config = ConfigDict(frozen=True)

    threads: int = Field(default=1, ge=1)
    seed: int = Field(default=DEFAULT_SEED, ge=0)
    log_level: str = "WARNING"
    max_enum_columns: int = Field(default=24, ge=1)
    max_field_order: int = Field(default=1 << 24, ge=2)
    round_cap_factor: int = Field(default=10_000, ge=1)
    block_size: int = Field(default=4096, ge=1)


_settings: Optional[Settings] = None


def _env_int(name, default):
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw.strip(), 0)
    except ValueError:
        raise InputError(f"{name}={raw!r} is not an integer") from None


def get_settings(refresh: bool = False) -> Settings:
    """
    Return the process-wide settings.

    Args:
        refresh (bool): Re-read the environment instead of using the cached copy

    Returns:
        Settings: Validated settings
    """
    global _settings
    if _settings is None or refresh:
        load_dotenv()
        try:
            _settings = Settings(
                threads=_env_int("RA_THREADS", os.cpu_count() or 1),
                seed=_env_int("RA_SEED", DEFAULT_SEED),
                log_level=os.getenv("RA_LOG_LEVEL", "WARNING").upper(),
                max_enum_columns=_env_int("RA_MAX_ENUM_COLUMNS", 24),
                max_field_order=_env_int("RA_MAX_FIELD_ORDER", 1 << 24),
                round_cap_factor=_env_int("RA_ROUND_CAP_FACTOR", 10_000),
                block_size=_env_int("RA_BLOCK_SIZE", 4096),
            )
        except ValidationError as e:
            error = e.errors()[0]
            raise InputError(f"invalid setting {error['loc'][0]}: {error['msg']}") from None
    return _settings


def configure_logging(level: Optional[str] = None) -> None:
    """Install a single stderr handler on the root logger."""
    level_name = (level or get_settings().log_level).upper()
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(getattr(logging, level_name, logging.WARNING))
