"""
Runtime settings for the engine.

Values come from `apps/engine/.env` (if present) and `FUZZYSCAN_*`
environment variables. CLI flags override whatever is loaded here.
"""
import logging
import os
from typing import Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator

from .errors import InvalidParameterError

logger = logging.getLogger(__name__)

ENV_PREFIX = "FUZZYSCAN_"
DEFAULT_ENV_FILE = os.path.join(os.path.dirname(__file__), ".env")
DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
DEFAULT_COUNTRY_TABLE = os.path.join(DATA_DIR, "countries.tsv")
DEFAULT_CORPORA_DIR = os.path.join(DATA_DIR, "corpora")
DEFAULT_HELDOUT = os.path.join(DATA_DIR, "heldout.tsv")


class Settings(BaseModel):
    """Tunable defaults for search, language identification and the CLI."""
    theta: float = Field(default=0.8, gt=0.0, le=1.0)
    ngram: int = Field(default=2, ge=1)
    bounds: Literal["tolerance", "literal"] = "tolerance"
    langid_k: int = Field(default=300, ge=1)
    confidence_floor: int = Field(default=10, ge=0)
    workers: int = Field(default=4, ge=1)
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = "WARNING"

    @field_validator("log_level", mode="before")
    @classmethod
    def upper_level(cls, value: object) -> object:
        return value.upper() if isinstance(value, str) else value


def load_settings(env_file: Optional[str] = None) -> Settings:
    """
    Build Settings from the environment.

    Args:
        env_file: Optional path to a dotenv file. Defaults to apps/engine/.env.

    Returns:
        Validated Settings.
    """
    path = env_file or DEFAULT_ENV_FILE
    if os.path.exists(path):
        load_dotenv(path, override=False)
        logger.debug("Loaded settings overrides from %s", path)

    values: dict[str, str] = {}
    for name in Settings.model_fields:
        raw = os.getenv(f"{ENV_PREFIX}{name.upper()}")
        if raw is not None and raw.strip():
            values[name] = raw.strip()

    try:
        return Settings.model_validate(values)
    except ValidationError as exc:
        raise InvalidParameterError(f"invalid {ENV_PREFIX}* setting: {exc}") from exc
