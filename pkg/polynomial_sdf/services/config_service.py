"""
Run configuration loading.

A config file is a flat list of `key=value` lines (comments with `#`),
read with python-dotenv. Command-line flags override file values.
Unknown keys are rejected by name so a typo never silently falls
back to a default.
"""

import logging
from pathlib import Path

from dotenv import dotenv_values
from pydantic import ValidationError

from polynomial_sdf.exceptions import ConfigError
from polynomial_sdf.schemas.run_config import RunConfig

logger = logging.getLogger(__name__)


def read_config_file(path: str | Path) -> dict[str, str]:
    """Raw key/value pairs of a config file, keys normalized to snake_case."""
    path = Path(path)
    if not path.is_file():
        raise OSError(f"config file not found: {path}")
    values = {}
    for key, value in dotenv_values(path).items():
        if value is None:
            raise ConfigError(f"{path}: key {key!r} has no value")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def parse_config(path: str | Path | None = None,
                 overrides: dict | None = None) -> RunConfig:
    """
    Merge a config file with flag overrides and validate the result.

    Overrides set to None are treated as not given.
    """
    merged = read_config_file(path) if path is not None else {}
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key.replace("-", "_")] = value

    allowed = RunConfig.keys()
    unknown = sorted(k for k in merged if k not in allowed)
    if unknown:
        raise ConfigError(
            f"unknown configuration key {unknown[0]!r}"
            + (f" (and {len(unknown) - 1} more)" if len(unknown) > 1 else "")
        )

    try:
        config = RunConfig.model_validate(merged)
    except ValidationError as e:
        error = e.errors()[0]
        field = ".".join(str(part) for part in error["loc"]) or "config"
        raise ConfigError(f"invalid value for {field}: {error['msg']}") from e

    logger.debug("Run configuration: %s", config.model_dump(exclude_none=True))
    return config
