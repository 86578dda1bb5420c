"""Tests for the special-case command.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

from collections.abc import Callable
from pathlib import Path

import pytest
import yaml

from lcblock_bounds import main


def test_special_case_plan(run_json: Callable[..., tuple[int, dict]]) -> None:
    """Test the closed-form report with its (m0, n0) plan."""
    code, report = run_json("special-case", "--tolerance", "0.5")

    assert code == 0
    assert report["schema_version"] == 1
    assert report["command"] == "special-case"
    assert report["K"] == 50
    assert report["kappa"] == pytest.approx(0.0789458, abs=1e-6)
    assert report["m0"] >= 1
    assert report["n0"] >= 1
    assert report["bound"] <= 0.5 * (1 + 1e-9)
    assert report["bound"] == pytest.approx(
        report["term_mixing"] + report["term_truncation"]
    )


def test_special_case_flags_override_config(
    run_json: Callable[..., tuple[int, dict]],
) -> None:
    """Test that exponent flags replace the configured ones."""
    code, report = run_json(
        "special-case", "--beta1", "5", "--beta2", "6", "--beta0", "2", "--seed", "7"
    )

    assert code == 0
    assert (report["beta1"], report["beta2"], report["beta0"]) == (5.0, 6.0, 2.0)
    assert report["tolerance"] == 0.5
    assert report["seed"] == 7


@pytest.mark.slow
def test_special_case_empirical(run_json: Callable[..., tuple[int, dict]]) -> None:
    """Test the comparison of a truncation with the reference solution."""
    code, report = run_json("special-case", "--empirical-n", "16")

    assert code == 0
    empirical = report["empirical"]
    assert empirical["n"] == 16
    assert empirical["n_ref"] == 1024
    assert 0 <= empirical["empirical_tv"] <= empirical["bound"]


def test_special_case_invalid_beta0(
    temp_config_dir: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    """Test that beta0 outside (1, beta1 - 1) is an argument error."""
    assert main(["special-case", "--beta0", "3"]) == 2

    captured = capsys.readouterr()
    assert captured.out == ""
    assert "1 < beta0 < beta1 - 1" in captured.err


def test_special_case_writes_file(temp_config_dir: Path, tmp_path: Path) -> None:
    """Test writing a YAML report to --out."""
    path = tmp_path / "plan.yaml"
    assert main(["special-case", "--output", "yaml", "--out", str(path)]) == 0

    report = yaml.safe_load(path.read_text())
    assert report["command"] == "special-case"
    assert report["K_literal"] == 49
