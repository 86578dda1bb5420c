"""Fixtures for the command tests.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import json
from collections.abc import Callable
from pathlib import Path

import pytest
import yaml

from lcblock_bounds import main
from tests.conftest import geometric_blocks


@pytest.fixture
def walk_config_file(tmp_path: Path) -> Path:
    """Write a small configuration of the geometric walk and return its path."""
    data = {
        "model": {"kind": "gig1-custom", "a_blocks": geometric_blocks()},
        "n_grid": [4, 8],
        "n_ref": 64,
        "m_max": 50,
        "validate": {
            "drift_margin": 60,
            "tail_check_span": 20,
            "marginal_grid": [4, 8],
            "n_max_dominance": 16,
        },
        "pipeline": {"window": 50},
    }
    path = tmp_path / "walk.yaml"
    with path.open("w") as f:
        yaml.dump(data, f)
    return path


@pytest.fixture
def run_json(
    temp_config_dir: Path, capsys: pytest.CaptureFixture[str]
) -> Callable[..., tuple[int, dict]]:
    """Return a helper running the command line and parsing its JSON report."""

    def run(*argv: str) -> tuple[int, dict]:
        code = main([*argv, "--output", "json"])
        out = capsys.readouterr().out
        return code, json.loads(out) if out else {}

    return run
