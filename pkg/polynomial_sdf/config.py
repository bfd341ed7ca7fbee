"""
Application configuration.

Process-level settings are loaded from environment variables
(optionally through a .env file). Model hyperparameters are not
here: they live on the run configuration and its schemas.
"""

import logging
import logging.config
import os
from functools import lru_cache
from pathlib import Path

from dotenv import load_dotenv

# Load .env file into environment variables
load_dotenv()


class Settings:
    """Application settings loaded from environment variables."""

    # Application
    APP_NAME: str = "Polynomial SDF"
    APP_VERSION: str = "0.1.0"
    ENVIRONMENT: str = os.getenv("POLYSDF_ENVIRONMENT", "development")

    # Logging
    LOG_LEVEL: str = os.getenv("POLYSDF_LOG_LEVEL", "INFO")
    LOG_CONFIG: str = os.getenv("POLYSDF_LOG_CONFIG", "logging.ini")

    # Numerics
    PRIOR_GRID_RESOLUTION: int = int(
        os.getenv("POLYSDF_PRIOR_GRID_RESOLUTION", "16")
    )
    ROW_CHUNK: int = int(os.getenv("POLYSDF_ROW_CHUNK", "256"))
    ORACLE_ACCELERATION: bool = (
        os.getenv("POLYSDF_ORACLE_ACCELERATION", "true").lower() == "true"
    )


@lru_cache()
def get_settings() -> Settings:
    """Return cached settings instance."""
    return Settings()


def setup_logging(level: str | None = None) -> None:
    """
    Configure logging for a command-line run.

    Uses the ini file named by LOG_CONFIG when it exists, otherwise
    falls back to a console handler.
    """
    settings = get_settings()
    config_path = Path(settings.LOG_CONFIG)
    if config_path.is_file():
        logging.config.fileConfig(config_path, disable_existing_loggers=False)
    else:
        logging.basicConfig(
            format="%(levelname)-5.5s [%(name)s] %(message)s",
            level=settings.LOG_LEVEL,
        )
    if level is not None:
        logging.getLogger("polynomial_sdf").setLevel(level.upper())
