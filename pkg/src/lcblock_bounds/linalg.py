"""Dense and banded kernels for finite stochastic matrices.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import logging

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import spsolve

from lcblock_bounds.errors import AmbiguityError, InvalidArgumentError

logger = logging.getLogger(__name__)

DEFAULT_PANEL = 64
RESCALE_LIMIT = 1e100


def gth_eliminate(
    matrix: np.ndarray, panel: int = DEFAULT_PANEL
) -> tuple[np.ndarray, int]:
    """Run blocked Grassmann-Taksar-Heyman elimination.

    Only off-diagonal entries are read and every update adds a product of
    nonnegative numbers, so no cancellation can occur. Steps are grouped
    into panels of ``panel`` states; each panel is reduced with rank-1
    updates restricted to its own rows and columns and then applied to
    the trailing block with one matrix product. Back substitution
    rescales the partial solution whenever an entry exceeds RESCALE_LIMIT.

    Args:
        matrix: Square nonnegative matrix (a stochastic matrix)
        panel: Number of elimination steps per panel

    Returns:
        The unnormalized solution and the number of states it covers. The
        count is smaller than the matrix order when elimination stopped at
        a state with no path to higher indices.

    Raises:
        InvalidArgumentError: If the matrix is not square

    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgumentError("matrix must be square")
    if panel < 1:
        raise InvalidArgumentError(f"panel must be positive, got {panel}")

    size = a.shape[0]
    stopped = False
    for p0 in range(0, size - 1, panel):
        p1 = min(p0 + panel, size)
        for i in range(p0, min(p1, size - 1)):
            scale = a[i, i + 1 : size].sum()
            if scale <= 0:
                logger.debug("GTH stopped at state %d of %d", i, size)
                size = i + 1
                stopped = True
                break
            a[i + 1 : size, i] /= scale
            # Panel columns for every remaining row.
            if i + 1 < p1:
                a[i + 1 : size, i + 1 : p1] += np.outer(
                    a[i + 1 : size, i], a[i, i + 1 : p1]
                )
                # Panel rows beyond the panel.
                a[i + 1 : p1, p1:size] += np.outer(
                    a[i + 1 : p1, i], a[i, p1:size]
                )
        if stopped:
            break
        if p1 < size:
            a[p1:size, p1:size] += a[p1:size, p0:p1] @ a[p0:p1, p1:size]

    x = np.zeros(a.shape[0])
    x[size - 1] = 1.0
    for i in range(size - 2, -1, -1):
        x[i] = x[i + 1 : size] @ a[i + 1 : size, i]
        if x[i] > RESCALE_LIMIT:
            x[i:size] /= x[i]
    return x, size


def band_widths(matrix: sparse.sparray) -> tuple[int, int]:
    """Return the lower and upper bandwidths of a sparse square matrix."""
    coo = sparse.coo_array(matrix)
    if coo.nnz == 0:
        return 0, 0
    offsets = coo.col.astype(np.int64) - coo.row.astype(np.int64)
    return max(int(-offsets.min()), 0), max(int(offsets.max()), 0)


def banded_gth_eliminate(matrix: sparse.sparray) -> tuple[np.ndarray, int]:
    """Run GTH elimination inside the band of a sparse matrix.

    Eliminating a state only updates entries between its lower and upper
    neighbours, so fill stays inside the band. Row i of the work array
    holds columns i - lower .. i + upper.

    Args:
        matrix: Square nonnegative sparse matrix

    Returns:
        The unnormalized solution and the number of states it covers, as
        for gth_eliminate

    Raises:
        InvalidArgumentError: If the matrix is not square

    """
    coo = sparse.coo_array(matrix)
    if coo.ndim != 2 or coo.shape[0] != coo.shape[1]:
        raise InvalidArgumentError("matrix must be square")
    lower, upper = band_widths(coo)
    size = coo.shape[0]
    band = np.zeros((size, lower + upper + 1))
    np.add.at(band, (coo.row, coo.col.astype(np.int64) - coo.row + lower), coo.data)

    stopped_at = size
    for i in range(size - 1):
        right = band[i, lower + 1 :]
        scale = right.sum()
        if scale <= 0:
            logger.debug("banded GTH stopped at state %d of %d", i, size)
            stopped_at = i + 1
            break
        rows = np.arange(i + 1, min(i + lower, size - 1) + 1)
        if rows.size == 0:
            continue
        below = band[rows, i - rows + lower] / scale
        band[rows, i - rows + lower] = below
        span = np.arange(i + 1, i + upper + 1)
        band[rows[:, None], span[None, :] - rows[:, None] + lower] += np.outer(
            below, right
        )

    x = np.zeros(size)
    x[stopped_at - 1] = 1.0
    for i in range(stopped_at - 2, -1, -1):
        rows = np.arange(i + 1, min(i + lower, stopped_at - 1) + 1)
        x[i] = x[rows] @ band[rows, i - rows + lower]
        if x[i] > RESCALE_LIMIT:
            x[i:stopped_at] /= x[i]
    return x, stopped_at


def closed_classes(matrix: np.ndarray | sparse.sparray) -> list[np.ndarray]:
    """Return the closed communicating classes of a nonnegative matrix.

    Args:
        matrix: Square nonnegative matrix, dense or sparse

    Returns:
        State index arrays, one per closed class, ordered by smallest state

    """
    adjacency = sparse.csr_array(
        matrix if sparse.issparse(matrix) else np.asarray(matrix)
    )
    adjacency = sparse.csr_array(adjacency > 0)
    count, labels = connected_components(adjacency, directed=True, connection="strong")
    rows, cols = adjacency.nonzero()
    leaving = labels[rows] != labels[cols]
    open_labels = set(labels[rows[leaving]].tolist())
    classes = [
        np.flatnonzero(labels == c) for c in range(count) if c not in open_labels
    ]
    return sorted(classes, key=lambda states: int(states[0]))


def gth_solve(
    matrix: np.ndarray | sparse.sparray, panel: int = DEFAULT_PANEL
) -> np.ndarray:
    """Return the stationary distribution of a stochastic matrix.

    Sparse matrices are eliminated inside their band, dense ones with the
    blocked elimination.

    Args:
        matrix: Square row-stochastic matrix, dense or sparse
        panel: Panel width of the blocked elimination

    Returns:
        Probability vector x with x matrix = x

    Raises:
        AmbiguityError: If the matrix has more than one closed class

    """
    if sparse.issparse(matrix):
        x, size = banded_gth_eliminate(matrix)
    else:
        x, size = gth_eliminate(matrix, panel)
    if size < x.shape[0]:
        classes = closed_classes(matrix)
        if len(classes) > 1:
            first, second = int(classes[0][0]), int(classes[1][0])
            raise AmbiguityError(
                f"chain has {len(classes)} closed classes; states {first} and "
                f"{second} do not communicate",
                (first, second),
            )
    return x / x.sum()


def lstsq_solve(matrix: np.ndarray) -> np.ndarray:
    """Stationary distribution from the normalized linear system.

    Stacks (P^T - I) with a row of ones and solves in the least-squares
    sense. Used as an independent oracle for the elimination solver.

    Args:
        matrix: Square row-stochastic matrix

    Returns:
        Probability vector solving x P = x, sum(x) = 1

    """
    p = np.asarray(matrix, dtype=float)
    n = p.shape[0]
    lhs = np.vstack((p.T - np.eye(n), np.ones((1, n))))
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    x, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    x = np.clip(x, 0.0, None)
    return x / x.sum()


def sparse_solve(matrix: sparse.sparray) -> np.ndarray:
    """Stationary distribution of a sparse matrix by a direct sparse solve.

    The last balance equation of (P^T - I) x = 0 is replaced by sum(x) = 1.

    Args:
        matrix: Square row-stochastic sparse matrix

    Returns:
        Probability vector solving x P = x, sum(x) = 1

    """
    p = sparse.csr_array(matrix, dtype=float)
    n = p.shape[0]
    balance = sparse.csr_array(p.T - sparse.eye_array(n, format="csr"))
    lhs = sparse.vstack((balance[: n - 1], sparse.csr_array(np.ones((1, n)))))
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    x = spsolve(sparse.csc_array(lhs), rhs)
    x = np.clip(x, 0.0, None)
    return x / x.sum()


def power_solve(
    matrix: np.ndarray | sparse.sparray,
    tol: float = 1e-13,
    max_iter: int = 1_000_000,
) -> np.ndarray:
    """Stationary distribution by lazy power iteration.

    Iterates x <- x (I + P) / 2, which converges for every irreducible
    chain, periodic ones included.

    Args:
        matrix: Square row-stochastic matrix, dense or sparse
        tol: Stop once successive iterates differ by at most this in l1
        max_iter: Iteration cap

    Returns:
        Approximate stationary probability vector

    """
    if sparse.issparse(matrix):
        p = sparse.csr_array(matrix, dtype=float)
    else:
        p = np.asarray(matrix, dtype=float)
    x = np.full(p.shape[0], 1.0 / p.shape[0])
    for _ in range(max_iter):
        nxt = 0.5 * (x + x @ p)
        nxt /= nxt.sum()
        if np.abs(nxt - x).sum() <= tol:
            return nxt
        x = nxt
    logger.warning("power iteration did not reach %g in %d steps", tol, max_iter)
    return x
