"""Test configuration and fixtures.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import os
import tempfile
from collections.abc import Generator
from pathlib import Path

import numpy as np
import pytest

from lcblock_bounds.gig1.spec import GIG1Kernel, GIG1Spec, explicit_gig1_spec
from lcblock_bounds.special_case import (
    SpecialCaseParams,
    build_special_spec,
    closed_form_params,
)


@pytest.fixture(scope="session")
def special_spec() -> GIG1Spec:
    """Return the zeta chain with beta1 = 3 and beta2 = 4."""
    return build_special_spec(3.0, 4.0)


@pytest.fixture(scope="session")
def special_kernel(special_spec: GIG1Spec) -> GIG1Kernel:
    """Return the assembled zeta chain."""
    return GIG1Kernel(special_spec)


@pytest.fixture(scope="session")
def special_params() -> SpecialCaseParams:
    """Return the closed-form constants for (3, 4, 1.5)."""
    return closed_form_params(3.0, 4.0, 1.5)


@pytest.fixture
def two_phase_spec() -> GIG1Spec:
    """Return a two-phase kernel with one up jump and one jump of -3.

    The phase matrix is [[0.6, 0.4], [0.4, 0.6]] and the mean drift is -1.
    """
    return explicit_gig1_spec(
        {1: [[0.6, 0.4], [0.0, 0.0]], -3: [[0.0, 0.0], [0.4, 0.6]]}
    )


def geometric_blocks(depth: int = 40, up: float = 0.3) -> dict[int, list]:
    """Return one-phase blocks: +1 with probability up, -j geometric below."""
    j = np.arange(1, depth + 1, dtype=float)
    weights = 2.0**-j
    weights *= (1.0 - up) / weights.sum()
    blocks = {1: [[up]]}
    blocks |= {-int(k): [[float(w)]] for k, w in zip(j, weights, strict=True)}
    return blocks


@pytest.fixture
def geometric_spec() -> GIG1Spec:
    """Return a one-phase kernel with geometric downward jumps."""
    return explicit_gig1_spec(geometric_blocks(), name="geometric")


@pytest.fixture
def temp_config_dir() -> Generator[Path]:
    """Create a temporary configuration directory.

    Returns:
        Generator yielding a temporary directory path

    """
    with tempfile.TemporaryDirectory() as temp_dir:
        temp_path = Path(temp_dir)
        # Save original environment variable
        original_xdg_config_home = os.environ.get("XDG_CONFIG_HOME")
        # Set test configuration directory
        os.environ["XDG_CONFIG_HOME"] = str(temp_path)
        yield temp_path
        # Restore original environment variable
        if original_xdg_config_home is None:
            os.environ.pop("XDG_CONFIG_HOME", None)
        else:
            os.environ["XDG_CONFIG_HOME"] = original_xdg_config_home
