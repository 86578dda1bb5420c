"""Tests for the error hierarchy.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import pytest

from lcblock_bounds.errors import (
    AmbiguityError,
    ConfigError,
    DomainError,
    LCBlockError,
    SearchExhaustedError,
    ToleranceUnreachableError,
)


@pytest.mark.parametrize(
    "error, exit_code",
    [
        (ConfigError("bad"), 2),
        (DomainError("bad"), 2),
        (AmbiguityError("bad", (0, 1)), 2),
        (SearchExhaustedError("bad", [1.0]), 2),
        (ToleranceUnreachableError("bad", 0.1), 3),
    ],
)
def test_exit_codes(error: LCBlockError, exit_code: int) -> None:
    """Test the exit code carried by each error."""
    assert error.exit_code == exit_code
    assert isinstance(error, ValueError)


def test_search_trajectory_defaults_to_empty() -> None:
    """Test that a search error without a trajectory reports an empty one."""
    assert SearchExhaustedError("bad").trajectory == []
