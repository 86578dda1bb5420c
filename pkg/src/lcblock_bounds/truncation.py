"""Last-column-block-augmented truncation of block kernels.

Truncations with at most DENSE_STATE_LIMIT states are stored densely.
Larger ones are stored as sparse block bands when the kernel declares a
finite level band, which keeps GTH elimination inside the band.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import logging
from enum import Enum

import numpy as np
from scipy import sparse

from lcblock_bounds.blockmatrix import BlockKernel, ExplicitBlockKernel
from lcblock_bounds.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

STOCHASTIC_TOL = 1e-12
DENSE_STATE_LIMIT = 20_000


class Storage(Enum):
    """How the entries of a truncation are held."""

    DENSE = "dense"
    BANDED = "banded"


class FiniteStochasticMatrix:
    """Stochastic matrix on levels 0..n with d phases per level."""

    def __init__(self, d: int, n: int, entries: np.ndarray | sparse.sparray) -> None:
        """Initialize the matrix.

        Args:
            d: Number of phases
            n: Largest level
            entries: Square dense array or sparse array of order (n+1)d

        Raises:
            InvalidArgumentError: If the entries are not a stochastic matrix
                of the declared order

        """
        if sparse.issparse(entries):
            matrix = sparse.csr_array(entries, dtype=float)
            values = matrix.data
            row_sums = np.asarray(matrix.sum(axis=1)).ravel()
        else:
            matrix = np.asarray(entries, dtype=float)
            values = matrix
            row_sums = matrix.sum(axis=1) if matrix.ndim == 2 else None
        order = (n + 1) * d
        if matrix.shape != (order, order):
            raise InvalidArgumentError(
                f"expected a {order}x{order} matrix, got {matrix.shape}"
            )
        if (values < 0).any():
            raise InvalidArgumentError("entries must be nonnegative")
        deviation = np.abs(row_sums - 1.0).max()
        if deviation > STOCHASTIC_TOL:
            raise InvalidArgumentError(
                f"rows must sum to 1, worst deviation {deviation:.3g}"
            )
        self.d = d
        self.n = n
        self.entries = matrix
        if isinstance(matrix, np.ndarray):
            self.entries.flags.writeable = False

    @property
    def order(self) -> int:
        """Get the number of states."""
        return self.entries.shape[0]

    @property
    def storage(self) -> Storage:
        """Get the storage of the entries."""
        return Storage.BANDED if sparse.issparse(self.entries) else Storage.DENSE

    def block(self, k: int, ell: int) -> np.ndarray:
        """Return the d x d block between levels k and ell."""
        d = self.d
        block = self.entries[k * d : (k + 1) * d, ell * d : (ell + 1) * d]
        return block.toarray() if sparse.issparse(block) else block.copy()

    def nonzero_entries(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return row indices, column indices and values of nonzero entries."""
        coo = sparse.coo_array(self.entries)
        keep = coo.data != 0
        order = np.lexsort((coo.col[keep], coo.row[keep]))
        return (
            coo.row[keep][order],
            coo.col[keep][order],
            coo.data[keep][order],
        )

    def as_kernel(self) -> ExplicitBlockKernel:
        """Embed the matrix as a kernel on all levels.

        Levels above n reuse row n, which keeps the embedding stochastic.

        Raises:
            InvalidArgumentError: If the entries are held as a band

        """
        if self.storage is Storage.BANDED:
            raise InvalidArgumentError("only dense truncations embed as a kernel")
        d = self.d
        size = self.n + 1
        blocks = self.entries.reshape(size, d, size, d).transpose(0, 2, 1, 3)
        return ExplicitBlockKernel(blocks)


def banded_entries(kernel: BlockKernel, n: int, down: int, up: int) -> sparse.csr_array:
    """Build the truncation at n from the blocks inside a level band.

    Row k holds P(k; ell) for max(k - down, 0) <= ell <= min(k + up, n - 1)
    and tail_block(k, n) when k + up >= n. Every other block of the
    truncation is zero for a kernel whose jumps stay within the band.

    Args:
        kernel: Kernel with level jumps in [-down, up]
        n: Truncation level
        down: Largest downward jump
        up: Largest upward jump

    Returns:
        Sparse array of order (n+1)d

    """
    d = kernel.d
    sources, targets, blocks = [], [], []
    for k in range(n + 1):
        for ell in range(max(k - down, 0), min(k + up, n - 1) + 1):
            sources.append(k)
            targets.append(ell)
            blocks.append(kernel.block(k, ell))
        if k + up >= n:
            sources.append(k)
            targets.append(n)
            blocks.append(kernel.tail_block(k, n))
    values = np.stack(blocks)
    phase = np.arange(d)
    rows = np.asarray(sources)[:, None, None] * d + phase[None, :, None]
    cols = np.asarray(targets)[:, None, None] * d + phase[None, None, :]
    rows, cols = np.broadcast_arrays(rows, cols)
    keep = values != 0
    order = (n + 1) * d
    return sparse.csr_array(
        (values[keep], (rows[keep], cols[keep])), shape=(order, order)
    )


def choose_storage(kernel: BlockKernel, n: int) -> Storage:
    """Return the storage used for the truncation of a kernel at level n."""
    states = (n + 1) * kernel.d
    if states <= DENSE_STATE_LIMIT:
        return Storage.DENSE
    if kernel.level_band is None:
        logger.warning(
            "kernel has no finite level band; storing %d states densely", states
        )
        return Storage.DENSE
    return Storage.BANDED


def lc_block_augment(
    kernel: BlockKernel, n: int, storage: Storage | None = None
) -> FiniteStochasticMatrix:
    """Build the last-column-block-augmented truncation on levels 0..n.

    Blocks (k, ell) with ell < n are copied from the kernel and block
    column n receives the exact tail sum, so every row keeps its mass.

    Args:
        kernel: Kernel to truncate
        n: Truncation level
        storage: Storage to use; chosen from the size and the kernel's
            level band when None

    Raises:
        InvalidArgumentError: If n is below 1, or banded storage is asked
            for a kernel without a finite level band

    """
    if n < 1:
        raise InvalidArgumentError(f"truncation level must be at least 1, got {n}")
    if storage is None:
        storage = choose_storage(kernel, n)
    if storage is Storage.DENSE:
        return FiniteStochasticMatrix(kernel.d, n, kernel.block_row_matrix(n))
    band = kernel.level_band
    if band is None:
        raise InvalidArgumentError("banded storage needs a kernel with a level band")
    logger.debug("banded truncation at n=%d with level band %s", n, band)
    return FiniteStochasticMatrix(kernel.d, n, banded_entries(kernel, n, *band))


def northwest_corner(kernel: BlockKernel, n: int) -> np.ndarray:
    """Return the plain substochastic northwest corner on levels 0..n."""
    if n < 0:
        raise InvalidArgumentError(f"level must be nonnegative, got {n}")
    size = (n + 1) * kernel.d
    return kernel.block_row_matrix(n + 1)[:size, :size]
