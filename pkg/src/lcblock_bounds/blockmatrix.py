"""Block-structured stochastic kernels and their order relations.

A kernel is indexed by (level, phase) with d phases per level. Order
checks compare block tail sums: P1 is dominated by P2 when every tail
sum of P1 is entrywise below the matching tail sum of P2.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum
from typing import Protocol

import numpy as np
from scipy.sparse.csgraph import connected_components

from lcblock_bounds.errors import (
    InvalidArgumentError,
    NotBlockMonotoneError,
    ReducibilityError,
)
from lcblock_bounds.linalg import gth_solve

logger = logging.getLogger(__name__)

ORDER_TOL = 1e-12
PSI_TOL = 1e-10
PSI_LEVELS = 10


class StructureTag(Enum):
    """How a kernel is represented."""

    EXPLICIT_FINITE = "explicit-finite"
    GI_G1 = "gi-g1"
    CUSTOM = "custom"


class BlockKernel(ABC):
    """Level/phase transition kernel with exact tail-sum access."""

    @property
    @abstractmethod
    def d(self) -> int:
        """Get the number of phases per level."""

    @property
    def structure_tag(self) -> StructureTag:
        """Get the representation tag."""
        return StructureTag.CUSTOM

    @property
    def max_down_jump(self) -> int | None:
        """Largest downward level jump, or None when unbounded."""
        return None

    @property
    def column_support(self) -> int | None:
        """Largest reachable target level, or None when unbounded."""
        return None

    @property
    def level_band(self) -> tuple[int, int] | None:
        """Largest downward and upward level jumps, or None when unbounded."""
        return None

    @abstractmethod
    def block(self, k: int, ell: int) -> np.ndarray:
        """Return the d x d block P(k; ell)."""

    @abstractmethod
    def tail_block(self, k: int, ell: int) -> np.ndarray:
        """Return the exact tail sum of P(k; m) over m >= ell."""

    def block_row(self, k: int, n: int) -> np.ndarray:
        """Return P(k; 0..n-1) followed by tail_block(k, n).

        Args:
            k: Source level
            n: Number of explicit blocks

        Returns:
            Array of shape (n + 1, d, d)

        """
        blocks = [self.block(k, ell) for ell in range(n)]
        blocks.append(self.tail_block(k, n))
        return np.stack(blocks)

    def block_row_matrix(self, n: int) -> np.ndarray:
        """Return the (n+1)d square matrix whose block row k is block_row(k, n)."""
        d = self.d
        out = np.empty(((n + 1) * d, (n + 1) * d))
        for k in range(n + 1):
            out[k * d : (k + 1) * d] = (
                self.block_row(k, n).transpose(1, 0, 2).reshape(d, -1)
            )
        return out

    def tail_row(self, k: int, n: int) -> np.ndarray:
        """Return tail_block(k, ell) for ell = 0..n as an (n+1, d, d) array."""
        row = self.block_row(k, n)
        return np.flip(np.cumsum(np.flip(row, axis=0), axis=0), axis=0)

    def repeating_tail_profile(self, lo: int, hi: int) -> np.ndarray | None:
        """Return the shared interior tail sums for jumps lo..hi-1.

        Kernels whose rows from level 1 on are shifts of each other
        override this; the default reports no such structure.
        """
        return None


class ExplicitBlockKernel(BlockKernel):
    """Kernel given by a finite table of block rows.

    Row k of the table lists P(k; 0..L-1) for a common width L. Levels at
    or beyond the table height reuse the last row, so the table must be
    stochastic on its own.
    """

    def __init__(self, blocks: np.ndarray) -> None:
        """Initialize the kernel.

        Args:
            blocks: Array of shape (rows, L, d, d)

        Raises:
            InvalidArgumentError: If blocks are negative or rows are not
                stochastic

        """
        table = np.asarray(blocks, dtype=float)
        if table.ndim != 4 or table.shape[2] != table.shape[3]:
            raise InvalidArgumentError("blocks must have shape (rows, L, d, d)")
        if (table < 0).any():
            raise InvalidArgumentError("blocks must be entrywise nonnegative")
        sums = table.sum(axis=(1, 3))
        if np.abs(sums - 1.0).max() > ORDER_TOL:
            raise InvalidArgumentError("every row of the block table must sum to 1")
        self._table = table
        self._tails = np.flip(np.cumsum(np.flip(table, axis=1), axis=1), axis=1)

    @property
    def d(self) -> int:
        """Get the number of phases per level."""
        return self._table.shape[2]

    @property
    def structure_tag(self) -> StructureTag:
        """Get the representation tag."""
        return StructureTag.EXPLICIT_FINITE

    @property
    def column_support(self) -> int | None:
        """Largest reachable target level."""
        return self._table.shape[1] - 1

    @property
    def width(self) -> int:
        """Get the number of target levels in the table."""
        return self._table.shape[1]

    def _row(self, k: int) -> int:
        if k < 0:
            raise InvalidArgumentError(f"level must be nonnegative, got {k}")
        return min(k, self._table.shape[0] - 1)

    def block(self, k: int, ell: int) -> np.ndarray:
        """Return the d x d block P(k; ell)."""
        if ell < 0:
            raise InvalidArgumentError(f"level must be nonnegative, got {ell}")
        if ell >= self.width:
            return np.zeros((self.d, self.d))
        return self._table[self._row(k), ell].copy()

    def tail_block(self, k: int, ell: int) -> np.ndarray:
        """Return the exact tail sum of P(k; m) over m >= ell."""
        if ell >= self.width:
            return np.zeros((self.d, self.d))
        return self._tails[self._row(k), max(ell, 0)].copy()

    def block_row(self, k: int, n: int) -> np.ndarray:
        """Return P(k; 0..n-1) followed by tail_block(k, n)."""
        row = np.zeros((n + 1, self.d, self.d))
        span = min(n, self.width)
        row[:span] = self._table[self._row(k), :span]
        row[n] = self.tail_block(k, n)
        return row


@dataclass(frozen=True)
class BlockVector:
    """Real vector indexed by (level, phase).

    Attributes:
        d: Number of phases
        value: Vectorized evaluator mapping a level array of shape (L,) to
            an array of shape (L, d)
        horizon: Largest level with possibly nonzero entries, or None
        bound: Known upper bound on every entry, or None

    """

    d: int
    value: Callable[[np.ndarray], np.ndarray]
    horizon: int | None = None
    bound: float | None = None

    def values(self, start: int, stop: int) -> np.ndarray:
        """Return entries for levels start..stop-1 as an (L, d) array."""
        levels = np.arange(start, stop)
        out = np.asarray(self.value(levels), dtype=float).reshape(len(levels), self.d)
        if self.horizon is not None:
            out = np.where((levels > self.horizon)[:, None], 0.0, out)
        return out

    def at(self, k: int) -> np.ndarray:
        """Return the phase vector at level k."""
        return self.values(k, k + 1)[0]

    def to_levels(self) -> np.ndarray:
        """Return all entries as an (horizon+1, d) array.

        Raises:
            InvalidArgumentError: If the vector has no finite horizon

        """
        if self.horizon is None:
            raise InvalidArgumentError("vector has unbounded support")
        return self.values(0, self.horizon + 1)

    @classmethod
    def constant(cls, d: int, c: float = 1.0) -> BlockVector:
        """Create the vector with every entry equal to c."""
        return cls(
            d=d,
            value=lambda levels: np.full((len(levels), d), float(c)),
            bound=abs(float(c)),
        )

    @classmethod
    def from_levels(cls, levels: np.ndarray) -> BlockVector:
        """Create a finitely supported vector from an (L, d) array."""
        table = np.asarray(levels, dtype=float)
        horizon = table.shape[0] - 1

        def value(ks: np.ndarray) -> np.ndarray:
            return table[np.clip(ks, 0, horizon)]

        return cls(
            d=table.shape[1],
            value=value,
            horizon=horizon,
            bound=float(np.abs(table).max()),
        )

    @classmethod
    def from_level_function(
        cls, d: int, f: Callable[[np.ndarray], np.ndarray], bound: float | None = None
    ) -> BlockVector:
        """Create a vector whose entries depend on the level only."""
        return cls(
            d=d,
            value=lambda levels: np.repeat(
                np.asarray(f(np.asarray(levels, dtype=float)), dtype=float)[:, None],
                d,
                axis=1,
            ),
            bound=bound,
        )


class LevelArray(Protocol):
    """Anything that exposes its entries as an (levels, d) array."""

    def to_levels(self) -> np.ndarray:
        """Return the entries as an (levels, d) array."""
        ...


def _check_horizon(level_horizon: int) -> None:
    if level_horizon < 1:
        raise InvalidArgumentError(
            f"level horizon must be at least 1, got {level_horizon}"
        )


def is_block_monotone(
    kernel: BlockKernel, level_horizon: int, tol: float = ORDER_TOL
) -> bool:
    """Check the block tail-sum ordering between consecutive levels.

    For GI/G/1-type kernels the rows from level 1 on are shifts of each
    other, so the interior comparison reduces to one pass over the
    diagonal profile and only levels 0 and 1 are compared block by block.

    Args:
        kernel: Kernel to check
        level_horizon: Largest level compared
        tol: Absolute tolerance

    Returns:
        True if the ordering holds on the horizon

    Raises:
        InvalidArgumentError: If the horizon is below 1

    """
    _check_horizon(level_horizon)
    if tol < 0:
        raise InvalidArgumentError(f"tolerance must be nonnegative, got {tol}")

    profile = None
    if kernel.structure_tag is StructureTag.GI_G1:
        profile = kernel.repeating_tail_profile(-level_horizon, level_horizon + 1)
    if profile is not None:
        lower = kernel.tail_row(0, level_horizon)
        upper = kernel.tail_row(1, level_horizon)
        if (lower > upper + tol).any():
            return False
        # Interior rows compare one diagonal shift apart.
        return bool((np.diff(profile, axis=0) <= tol).all())

    previous = kernel.tail_row(0, level_horizon)
    for k in range(1, level_horizon + 1):
        current = kernel.tail_row(k, level_horizon)
        if (previous > current + tol).any():
            logger.debug("block monotonicity fails between levels %d and %d", k - 1, k)
            return False
        previous = current
    return True


def is_block_increasing(f: BlockVector, level_horizon: int) -> bool:
    """Check that f(k, i) <= f(k+1, i) for every k below the horizon."""
    _check_horizon(level_horizon)
    values = f.values(0, level_horizon + 1)
    return bool((np.diff(values, axis=0) >= 0).all())


def block_dominates(
    p1: BlockKernel, p2: BlockKernel, level_horizon: int, tol: float = ORDER_TOL
) -> bool:
    """Check that p1 is block-wise dominated by p2 on the horizon.

    Args:
        p1: Dominated kernel
        p2: Dominating kernel
        level_horizon: Largest source and target level compared
        tol: Absolute tolerance

    Returns:
        True if every tail sum of p1 is at most the matching tail of p2

    Raises:
        InvalidArgumentError: If the phase counts differ

    """
    if p1.d != p2.d:
        raise InvalidArgumentError(f"phase counts differ: {p1.d} != {p2.d}")
    _check_horizon(level_horizon)
    for k in range(level_horizon + 1):
        if (p1.tail_row(k, level_horizon) > p2.tail_row(k, level_horizon) + tol).any():
            return False
    return True


def vector_block_dominates(
    mu: LevelArray, eta: LevelArray, tol: float = ORDER_TOL
) -> bool:
    """Check that the probability vector mu is block-wise dominated by eta.

    The shorter vector is padded with zero levels.

    Raises:
        InvalidArgumentError: If either input is not a probability vector

    """
    a = np.asarray(mu.to_levels(), dtype=float)
    b = np.asarray(eta.to_levels(), dtype=float)
    for name, x in (("mu", a), ("eta", b)):
        if (x < -1e-15).any() or abs(x.sum() - 1.0) > 1e-10:
            raise InvalidArgumentError(f"{name} is not a probability vector")
    if a.shape[1] != b.shape[1]:
        raise InvalidArgumentError("vectors have different phase counts")
    levels = max(a.shape[0], b.shape[0])
    a = np.pad(a, ((0, levels - a.shape[0]), (0, 0)))
    b = np.pad(b, ((0, levels - b.shape[0]), (0, 0)))
    tail_a = np.flip(np.cumsum(np.flip(a, axis=0), axis=0), axis=0)
    tail_b = np.flip(np.cumsum(np.flip(b, axis=0), axis=0), axis=0)
    return bool((tail_a <= tail_b + tol).all())


def boundary_matrix_psi(kernel: BlockKernel) -> np.ndarray:
    """Return the phase matrix, constant across levels for monotone kernels.

    Raises:
        NotBlockMonotoneError: If the full row sums change with the level

    """
    psi = kernel.tail_block(0, 0)
    for k in range(1, PSI_LEVELS + 1):
        gap = np.abs(kernel.tail_block(k, 0) - psi).max()
        if gap > PSI_TOL:
            raise NotBlockMonotoneError(
                f"phase matrix at level {k} differs from level 0 by {gap:.3g}"
            )
    return psi


def stationary_phase(psi: np.ndarray) -> np.ndarray:
    """Return the stationary vector of an irreducible phase matrix.

    Raises:
        ReducibilityError: If the matrix is reducible
        InvalidArgumentError: If the matrix is not row-stochastic

    """
    matrix = np.asarray(psi, dtype=float)
    if (matrix < 0).any() or np.abs(matrix.sum(axis=1) - 1.0).max() > ORDER_TOL:
        raise InvalidArgumentError("phase matrix must be row-stochastic")
    count, _ = connected_components(matrix > 0, directed=True, connection="strong")
    if count > 1:
        raise ReducibilityError(
            f"phase matrix is reducible ({count} communicating classes)"
        )
    varpi = gth_solve(matrix)
    residual = np.abs(varpi @ matrix - varpi).sum()
    if residual > ORDER_TOL:
        logger.warning("phase vector residual %.3g exceeds %.1g", residual, ORDER_TOL)
    return varpi
