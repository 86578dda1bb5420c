"""Packaged default configuration of lcblock-bounds.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

from importlib import resources

DEFAULT_CONFIG_NAME = "default.yaml"

DEFAULT_CONFIG = (
    resources.files(__package__).joinpath(DEFAULT_CONFIG_NAME).read_text("utf-8")
)
