"""Tests for the validation suite and level sweeps.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

from unittest.mock import patch

import numpy as np
import pytest

from lcblock_bounds.config import RunConfig
from lcblock_bounds.errors import ConfigError, ContractError
from lcblock_bounds.model import ModelBounds
from lcblock_bounds.solver import solve_truncation
from lcblock_bounds.validation import (
    CheckResult,
    CheckStatus,
    Validator,
    run_sweep,
)
from tests.conftest import geometric_blocks

WALK_CONFIG = {
    "model": {"kind": "gig1-custom", "a_blocks": geometric_blocks()},
    "n_grid": [4, 8],
    "n_ref": 64,
    "m_max": 50,
    "validate": {
        "drift_margin": 60,
        "tail_check_span": 20,
        "marginal_grid": [4, 8, 16],
        "n_max_dominance": 16,
    },
    "pipeline": {"window": 50},
}

CHECK_NAMES = [
    "marginal_identity",
    "block_order",
    "drift",
    "tail_inequality",
    "bound_soundness",
    "vector_dominance",
]


@pytest.fixture(scope="module")
def walk_config() -> RunConfig:
    """Return a small configuration of the geometric walk."""
    return RunConfig(WALK_CONFIG)


@pytest.fixture(scope="module")
def walk_model(walk_config: RunConfig) -> ModelBounds:
    """Return the model of the walk, shared between tests."""
    return ModelBounds(walk_config)


def test_walk_passes_every_check(
    walk_config: RunConfig, walk_model: ModelBounds
) -> None:
    """Test the full suite on a kernel that meets every hypothesis."""
    results = Validator(walk_config, walk_model).run()
    assert [r.name for r in results] == CHECK_NAMES
    failed = [r.to_dict() for r in results if r.failed]
    assert failed == []
    assert all(r.status is CheckStatus.PASS for r in results)


def test_validator_reuses_solutions(
    walk_config: RunConfig, walk_model: ModelBounds
) -> None:
    """Test that each truncation is solved once."""
    validator = Validator(walk_config, walk_model)
    with patch(
        "lcblock_bounds.validation.solve_truncation", wraps=solve_truncation
    ) as mock_solve:
        validator.check_marginal_identity()
        validator.check_marginal_identity()
        assert mock_solve.call_count == 3


def test_scaled_drift_constant_fails(
    walk_config: RunConfig, walk_model: ModelBounds
) -> None:
    """Test that halving b breaks the drift check."""
    config = walk_config.override(**{"validate.b_scale": 0.5})
    result = Validator(config, walk_model).check_drift()
    assert result.status is CheckStatus.FAIL
    assert result.worst_slack < 0


def test_raising_check_is_reported(
    walk_config: RunConfig, walk_model: ModelBounds
) -> None:
    """Test that an exception inside a check becomes a failed entry."""

    def check_drift(self: Validator) -> CheckResult:
        raise ContractError("broken certificate")

    validator = Validator(walk_config, walk_model)
    with patch.object(Validator, "check_drift", check_drift):
        results = {r.name: r for r in validator.run()}
    assert results["drift"].status is CheckStatus.FAIL
    assert results["drift"].detail == "broken certificate"
    assert results["marginal_identity"].status is CheckStatus.PASS


def test_empty_grid_skips(walk_config: RunConfig, walk_model: ModelBounds) -> None:
    """Test that checks without levels are skipped rather than failed."""
    config = walk_config.override(n_grid=[], **{"validate.marginal_grid": []})
    validator = Validator(config, walk_model)
    assert validator.check_bound_soundness().status is CheckStatus.SKIPPED
    assert validator.check_vector_dominance().status is CheckStatus.SKIPPED
    assert validator.check_marginal_identity().status is CheckStatus.SKIPPED


def test_validator_needs_reference(walk_config: RunConfig) -> None:
    """Test that n_ref is checked before any solve."""
    config = walk_config.override(n_ref=32)
    with pytest.raises(ConfigError, match="n_ref=32"):
        Validator(config)


def test_check_result_dict() -> None:
    """Test the plain form of a check result."""
    result = CheckResult("drift", CheckStatus.FAIL, -0.5, "levels 0..10")
    assert result.failed
    assert result.to_dict() == {
        "name": "drift",
        "status": "fail",
        "worst_slack": -0.5,
        "detail": "levels 0..10",
    }


def test_sweep_rows(walk_config: RunConfig, walk_model: ModelBounds) -> None:
    """Test one row per grid level with a sound bound."""
    rows = run_sweep(walk_config.override(jobs=2), walk_model)
    assert [row["n"] for row in rows] == [4, 8]
    assert list(rows[0]) == [
        "n",
        "m_star",
        "bound",
        "empirical_tv",
        "boundary_mass",
        "runtime_ms",
    ]
    for row in rows:
        assert 1 <= row["m_star"] <= 50
        assert 0 <= row["empirical_tv"] <= 1
        assert row["bound"] > 0
        assert 0 < row["boundary_mass"] < 1
        assert row["runtime_ms"] >= 0
    assert rows[1]["empirical_tv"] <= rows[0]["empirical_tv"]


def test_sweep_without_timings(walk_config: RunConfig, walk_model: ModelBounds) -> None:
    """Test that rows without timings repeat exactly."""
    first = run_sweep(walk_config, walk_model, timings=False)
    second = run_sweep(walk_config, walk_model, timings=False)
    assert first == second
    assert all("runtime_ms" not in row for row in first)


def test_sweep_needs_grid(walk_config: RunConfig) -> None:
    """Test that a sweep without levels is a configuration error."""
    with pytest.raises(ConfigError, match="n_grid must not be empty"):
        run_sweep(walk_config.override(n_grid=[]))


@pytest.mark.slow
def test_special_case_validates() -> None:
    """Test the default special-case configuration end to end."""
    config = RunConfig(
        {
            "n_grid": [8, 16, 32],
            "n_ref": 256,
            "validate": {"marginal_grid": [4, 16, 64], "drift_margin": 200},
        }
    )
    results = Validator(config).run()
    assert not any(r.failed for r in results)
    marginal = next(r for r in results if r.name == "marginal_identity")
    assert np.isclose(marginal.worst_slack, 1e-10, atol=1e-10)
