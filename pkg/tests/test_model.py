"""Tests for the bounds of a configured model.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

from unittest.mock import patch

import pytest

from lcblock_bounds.bounds import BoundVariant
from lcblock_bounds.config import RunConfig
from lcblock_bounds.model import ModelBounds
from lcblock_bounds.special_case import bound_special, plan_tolerance_special
from tests.conftest import geometric_blocks

WALK_CONFIG = {
    "model": {"kind": "gig1-custom", "a_blocks": geometric_blocks()},
    "pipeline": {"window": 50},
}


@pytest.fixture(scope="module")
def special_model() -> ModelBounds:
    """Return the default special-case model."""
    return ModelBounds(RunConfig({}))


@pytest.fixture(scope="module")
def walk_model() -> ModelBounds:
    """Return the one-phase walk with geometric downward jumps."""
    return ModelBounds(RunConfig(WALK_CONFIG))


def test_special_model_uses_closed_forms(special_model: ModelBounds) -> None:
    """Test that the special case delegates to the closed-form bound."""
    assert special_model.is_special
    params = special_model.params
    assert params.K == 50
    report = special_model.bound(3, 40)
    assert report == bound_special(params, 3, 40)
    assert report.variant is BoundVariant.SPECIAL
    assert special_model.plan(0.5) == plan_tolerance_special(params, 0.5)


def test_best_bound_scans_m(special_model: ModelBounds) -> None:
    """Test that the best bound is no larger than any scanned m."""
    best = special_model.best_bound(64, m_max=20)
    assert 1 <= best.m <= 20
    for m in (1, 5, 20):
        assert best.bound_value <= special_model.bound(m, 64).bound_value


def test_special_describe(special_model: ModelBounds) -> None:
    """Test the model section of a special-case report."""
    data = special_model.describe()
    assert data["model"] == "special-case"
    assert data["K"] == 50
    assert data["beta0"] == 1.5


def test_walk_model_runs_pipeline_once(walk_model: ModelBounds) -> None:
    """Test that a custom kernel takes its constants from the pipeline."""
    assert walk_model.params is None
    assert not walk_model.is_special
    result = walk_model.pipeline
    with patch("lcblock_bounds.model.run_pipeline") as mock_run:
        assert walk_model.pipeline is result
        walk_model.bound(2, 10)
        mock_run.assert_not_called()
    assert result.k_choice.K == 9


def test_walk_bound(walk_model: ModelBounds) -> None:
    """Test the GI/G/1 bound of the walk."""
    report = walk_model.bound(4, 100)
    assert report.variant is BoundVariant.GIG1
    assert report.bound_value == pytest.approx(
        report.term_mixing + report.term_truncation
    )
    assert walk_model.bound(4, 1000).term_truncation < report.term_truncation


def test_walk_plan(walk_model: ModelBounds) -> None:
    """Test that the planned levels meet the tolerance."""
    plan = walk_model.plan(0.5)
    assert walk_model.bound(plan.m0, plan.n0).bound_value <= 0.5 * (1 + 1e-12)
    if plan.m0 > 1:
        assert walk_model.bound(plan.m0 - 1, 1).term_mixing > 0.25


def test_walk_describe(walk_model: ModelBounds) -> None:
    """Test the model section of a custom-kernel report."""
    data = walk_model.describe()
    assert data["model"] == "gig1-custom"
    assert data["name"] == "gig1-custom"
    assert data["K"] == 9
