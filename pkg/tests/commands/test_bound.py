"""Tests for the bound command.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

from collections.abc import Callable
from pathlib import Path

import pytest

from lcblock_bounds import main


def test_bound_fixed_m(run_json: Callable[..., tuple[int, dict]]) -> None:
    """Test the bound at a given (m, n) of the special case."""
    code, report = run_json("bound", "64", "--m", "3")

    assert code == 0
    assert report["command"] == "bound"
    assert report["model"] == "special-case"
    assert (report["m"], report["n"]) == (3, 64)
    assert report["variant"] == "special"


def test_bound_minimizes_m(run_json: Callable[..., tuple[int, dict]]) -> None:
    """Test that the best m is reported and no worse than m = 1."""
    _, best = run_json("bound", "64", "--m-max", "30")
    _, first = run_json("bound", "64", "--m", "1")

    assert 1 <= best["m"] <= 30
    assert best["bound_value"] <= first["bound_value"]


def test_bound_with_plan(run_json: Callable[..., tuple[int, dict]]) -> None:
    """Test that a tolerance adds the (m0, n0) plan."""
    code, report = run_json("bound", "64", "--m", "2", "-E", "1.0")

    assert code == 0
    assert report["m0"] >= 1
    assert report["n0"] >= 1


def test_bound_custom_kernel(
    run_json: Callable[..., tuple[int, dict]], walk_config_file: Path
) -> None:
    """Test the bound of a configured GI/G/1 kernel."""
    code, report = run_json("-c", str(walk_config_file), "bound", "100", "--m", "4")

    assert code == 0
    assert report["model"] == "gig1-custom"
    assert report["K"] == 9
    assert report["variant"] == "gig1"


def test_bound_csv_refused(
    temp_config_dir: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    """Test that CSV is refused for a single bound."""
    assert main(["bound", "8", "--m", "1", "--output", "csv"]) == 2
    assert "CSV output needs a tabular report" in capsys.readouterr().err
