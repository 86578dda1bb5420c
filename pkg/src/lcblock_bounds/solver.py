"""Stationary vectors of finite truncations and distances between them.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from lcblock_bounds.blockmatrix import BlockKernel
from lcblock_bounds.errors import InvalidArgumentError
from lcblock_bounds.linalg import gth_solve, lstsq_solve, power_solve, sparse_solve
from lcblock_bounds.truncation import (
    FiniteStochasticMatrix,
    Storage,
    lc_block_augment,
)

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-12
REFERENCE_FACTOR = 8


@dataclass(frozen=True, eq=False)
class ProbabilityVector:
    """Probability vector on levels 0..n with d phases.

    Attributes:
        levels: Array of shape (n+1, d)

    """

    levels: np.ndarray

    def __post_init__(self) -> None:
        """Validate the entries.

        Raises:
            InvalidArgumentError: If the entries are not a distribution

        """
        if self.levels.ndim != 2:
            raise InvalidArgumentError("levels must have shape (n+1, d)")
        if (self.levels < -1e-15).any() or abs(self.levels.sum() - 1.0) > 1e-10:
            raise InvalidArgumentError("entries must form a probability vector")

    @classmethod
    def from_flat(cls, x: np.ndarray, d: int) -> ProbabilityVector:
        """Create a vector from a flat (level-major) array."""
        return cls(np.asarray(x, dtype=float).reshape(-1, d))

    @property
    def d(self) -> int:
        """Get the number of phases."""
        return self.levels.shape[1]

    @property
    def n(self) -> int:
        """Get the largest level."""
        return self.levels.shape[0] - 1

    def flat(self) -> np.ndarray:
        """Return the entries in level-major order."""
        return self.levels.reshape(-1)

    def to_levels(self) -> np.ndarray:
        """Return the entries as an (n+1, d) array."""
        return self.levels

    def boundary_mass(self) -> float:
        """Return the total mass on the last level."""
        return float(self.levels[-1].sum())


def _residual(x: np.ndarray, matrix: FiniteStochasticMatrix) -> float:
    return float(np.abs(x @ matrix.entries - x).sum())


def stationary_gth(matrix: FiniteStochasticMatrix) -> ProbabilityVector:
    """Solve for the stationary vector by GTH elimination.

    Raises:
        AmbiguityError: If the matrix has several closed classes

    """
    x = gth_solve(matrix.entries)
    residual = _residual(x, matrix)
    if residual > RESIDUAL_TOL:
        logger.warning(
            "GTH residual %.3g exceeds %.1g at n=%d", residual, RESIDUAL_TOL, matrix.n
        )
    return ProbabilityVector.from_flat(x, matrix.d)


def stationary_dense(matrix: FiniteStochasticMatrix) -> ProbabilityVector:
    """Solve the normalized linear system directly (oracle path)."""
    if matrix.storage is Storage.BANDED:
        return ProbabilityVector.from_flat(sparse_solve(matrix.entries), matrix.d)
    return ProbabilityVector.from_flat(lstsq_solve(matrix.entries), matrix.d)


def stationary_power(
    matrix: FiniteStochasticMatrix, tol: float = 1e-13
) -> ProbabilityVector:
    """Approximate the stationary vector by lazy power iteration."""
    return ProbabilityVector.from_flat(power_solve(matrix.entries, tol), matrix.d)


def total_variation(mu: ProbabilityVector, eta: ProbabilityVector) -> float:
    """Return the sum of absolute differences, padding with zero levels.

    Raises:
        InvalidArgumentError: If the phase counts differ

    """
    if mu.d != eta.d:
        raise InvalidArgumentError(f"phase counts differ: {mu.d} != {eta.d}")
    a, b = mu.levels, eta.levels
    levels = max(a.shape[0], b.shape[0])
    a = np.pad(a, ((0, levels - a.shape[0]), (0, 0)))
    b = np.pad(b, ((0, levels - b.shape[0]), (0, 0)))
    return float(np.abs(a - b).sum())


def level_marginal(pi: ProbabilityVector) -> np.ndarray:
    """Return the phase marginal, summing over levels."""
    return pi.levels.sum(axis=0)


def solve_truncation(kernel: BlockKernel, n: int) -> ProbabilityVector:
    """Return the stationary vector of the truncation at level n."""
    return stationary_gth(lc_block_augment(kernel, n))


def reference_pi(
    kernel: BlockKernel, n_ref: int, studied_max: int | None = None
) -> ProbabilityVector:
    """Return a large truncation's stationary vector as a stand-in for pi.

    Args:
        kernel: Kernel being approximated
        n_ref: Reference truncation level
        studied_max: Largest level compared against the reference, if any

    Returns:
        Stationary vector of the truncation at n_ref

    Raises:
        InvalidArgumentError: If n_ref is not far enough above studied_max

    """
    if studied_max is not None and n_ref < REFERENCE_FACTOR * studied_max:
        raise InvalidArgumentError(
            f"reference level {n_ref} must be at least {REFERENCE_FACTOR} times "
            f"the largest studied level {studied_max}"
        )
    logger.info("solving reference truncation at n=%d", n_ref)
    return solve_truncation(kernel, n_ref)
