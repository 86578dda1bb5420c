"""Configuration initialization.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import logging
from pathlib import Path

import yaml
from xdg import xdg_config_home

from .default import DEFAULT_CONFIG
from .loader import APP_DIR


def init_config(force: bool = False) -> Path:
    """Write the packaged defaults to the user configuration file.

    An existing file is kept unless force is set.

    Returns:
        Path of the configuration file

    """
    config_dir = xdg_config_home() / APP_DIR
    config_dir.mkdir(parents=True, exist_ok=True)
    config_file = config_dir / "config.yaml"

    # Check if config file already exists
    if config_file.exists() and not force:
        logging.info("Configuration file already exists at %s", config_file)
        return config_file

    config = yaml.safe_load(DEFAULT_CONFIG)
    with config_file.open("w") as f:
        yaml.dump(config, f, default_flow_style=False, sort_keys=False)

    logging.info("Configuration saved to %s", config_file)
    return config_file
