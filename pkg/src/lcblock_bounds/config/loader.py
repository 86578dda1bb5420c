"""Configuration loader.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import logging
from pathlib import Path

import yaml
from xdg import xdg_config_dirs, xdg_config_home

from lcblock_bounds.errors import ConfigError

from .default import DEFAULT_CONFIG
from .types import RunConfig, merge

APP_DIR = "lcblock-bounds"


def _read(config_file: Path) -> dict:
    with config_file.open() as f:
        data = yaml.safe_load(f)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("Configuration must be a dictionary")
    return data


def get_config(path: str | Path | None = None) -> RunConfig:
    """Load configuration from a given file, the user config file or the default.

    User values are merged over the packaged defaults.

    Args:
        path: Explicit configuration file; errors reading it are fatal

    Returns:
        RunConfig: Configuration object

    Raises:
        ConfigError: If the explicit file cannot be read or is invalid

    """
    defaults = yaml.safe_load(DEFAULT_CONFIG)
    if path is not None:
        try:
            return RunConfig(merge(defaults, _read(Path(path))))
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(f"Failed to load config from {path}: {e}") from e

    for config_dir in [xdg_config_home(), *xdg_config_dirs()]:
        config_file = config_dir / APP_DIR / "config.yaml"
        if config_file.exists():
            try:
                config_data = _read(config_file)
                if config_data:
                    return RunConfig(merge(defaults, config_data))
            except Exception as e:
                logging.warning("Failed to load config from %s: %s", config_file, e)
                continue

    # If no valid user configuration is found, use default configuration
    return RunConfig(defaults)
