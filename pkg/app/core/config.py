# app/core/config.py
import logging
from functools import lru_cache
from pathlib import Path
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict

PACKAGE_DIR = Path(__file__).resolve().parent.parent

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class Settings(BaseSettings):
    # Worker pool size for parameter sweeps (1 = run inline)
    THREADS: int = 1

    # Quadrature tolerances (relative)
    QUAD_EPSREL: float = 1e-8
    OUTPUT_QUAD_EPSREL: float = 1e-7
    QUAD_LIMIT: int = 20000

    # Sweeps
    GRID_CAP: int = 20000
    SEED: int = 12345
    OUTPUT_DIR: Path = Path("results")
    PRESETS_DIR: Path = PACKAGE_DIR / "presets"

    # Stochastic oracle
    ORACLE_BATCH: int = 1000
    ORACLE_SCHEME: str = "exponential"

    LOG_LEVEL: str = "INFO"

    model_config = SettingsConfigDict(
        env_prefix="OPTOMECH_",
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )


# Create a global settings instance
settings = Settings()


@lru_cache()
def get_settings() -> Settings:
    return Settings()


def configure_logging(level: Optional[str] = None) -> None:
    """Configure root logging the same way for the CLI, the API and the tests."""
    logging.basicConfig(
        level=getattr(logging, (level or settings.LOG_LEVEL).upper(), logging.INFO),
        format=LOG_FORMAT,
    )
