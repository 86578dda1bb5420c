"""GI/G/1-type kernels: block tables, assembled kernels and modified kernels.

A GI/G/1-type kernel moves between levels by a Markov additive increment
A(k), k in Z, reflected at level 0: row 0 is B(.), column 0 collects the
undershoot underline-A(-k) = sum of A(l) over l <= -k, and the interior
is Toeplitz.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from lcblock_bounds.blockmatrix import (
    ORDER_TOL,
    BlockKernel,
    StructureTag,
    stationary_phase,
)
from lcblock_bounds.errors import InvalidArgumentError, SearchExhaustedError
from lcblock_bounds.gig1.envelope import TailEnvelope

logger = logging.getLogger(__name__)

BlockRange = Callable[[int, int], np.ndarray]
BlockTail = Callable[[int], np.ndarray]


@dataclass(frozen=True, eq=False)
class GIG1Spec:
    """Exact description of a GI/G/1-type kernel.

    Attributes:
        d: Number of phases
        a_range: Returns A(lo..hi-1) as a (hi - lo, d, d) array
        b_range: Returns B(lo..hi-1) for 0 <= lo
        positive_tail: Sum of A(k) over k >= m, for m >= 0
        negative_tail: Sum of A(k) over k <= -m, for m >= 0
        boundary_tail: Sum of B(k) over k >= m, for m >= 0
        first_moment_pos: Sum of k A(k) over k >= 1
        first_moment_neg: Sum of k A(k) over k <= -1
        positive_tail_moment: Sum of k A(k) over k >= m, if known
        lower_support: Smallest k with A(k) != 0, None when unbounded
        upper_support: Largest k with A(k) != 0, None when unbounded
        boundary_support: Largest k with B(k) != 0, None when unbounded
        envelope: Majorant of A(l) e for l >= 0
        boundary_envelope: Majorant of B(l) e for l >= 0
        name: Label used in reports

    """

    d: int
    a_range: BlockRange
    b_range: BlockRange
    positive_tail: BlockTail
    negative_tail: BlockTail
    boundary_tail: BlockTail
    first_moment_pos: np.ndarray
    first_moment_neg: np.ndarray
    positive_tail_moment: BlockTail | None = None
    lower_support: int | None = None
    upper_support: int | None = None
    boundary_support: int | None = None
    envelope: TailEnvelope | None = None
    boundary_envelope: TailEnvelope | None = None
    name: str = "gi-g1"

    def a_block(self, k: int) -> np.ndarray:
        """Return A(k)."""
        return self.a_range(k, k + 1)[0]

    def phase_matrix(self) -> np.ndarray:
        """Return A, the sum of A(k) over all k."""
        return self.negative_tail(0) + self.positive_tail(1)

    def a_tail_from(self, j: int) -> np.ndarray:
        """Return the sum of A(m) over m >= j for any integer j."""
        if j >= 0:
            return self.positive_tail(j)
        return self.positive_tail(0) + self.a_range(j, 0).sum(axis=0)

    def drift_vector(self) -> np.ndarray:
        """Return the one-step mean increment per phase."""
        return (self.first_moment_pos + self.first_moment_neg).sum(axis=1)


class GIG1Kernel(BlockKernel):
    """The assembled level/phase kernel of a GIG1Spec."""

    def __init__(self, spec: GIG1Spec) -> None:
        """Initialize the kernel."""
        self.spec = spec

    @property
    def d(self) -> int:
        """Get the number of phases per level."""
        return self.spec.d

    @property
    def structure_tag(self) -> StructureTag:
        """Get the representation tag."""
        return StructureTag.GI_G1

    @property
    def max_down_jump(self) -> int | None:
        """Largest downward level jump."""
        lower = self.spec.lower_support
        return None if lower is None else max(-lower, 0)

    @property
    def column_support(self) -> int | None:
        """Kernels on all levels have unbounded column support."""
        return None

    @property
    def level_band(self) -> tuple[int, int] | None:
        """Largest downward and upward level jumps over all rows."""
        spec = self.spec
        if None in (spec.lower_support, spec.upper_support, spec.boundary_support):
            return None
        return max(-spec.lower_support, 0), max(
            spec.upper_support, spec.boundary_support, 0
        )

    def block(self, k: int, ell: int) -> np.ndarray:
        """Return the d x d block P(k; ell)."""
        if k < 0 or ell < 0:
            raise InvalidArgumentError(f"levels must be nonnegative, got {k}, {ell}")
        if k == 0:
            return self.spec.b_range(ell, ell + 1)[0]
        if ell == 0:
            return self.spec.negative_tail(k)
        return self.spec.a_block(ell - k)

    def tail_block(self, k: int, ell: int) -> np.ndarray:
        """Return the exact tail sum of P(k; m) over m >= ell."""
        ell = max(ell, 0)
        if k == 0:
            return self.spec.boundary_tail(ell)
        if ell == 0:
            return self.spec.phase_matrix()
        return self.spec.a_tail_from(ell - k)

    def block_row(self, k: int, n: int) -> np.ndarray:
        """Return P(k; 0..n-1) followed by tail_block(k, n)."""
        d = self.d
        row = np.zeros((n + 1, d, d))
        if k == 0:
            row[:n] = self.spec.b_range(0, n)
            row[n] = self.spec.boundary_tail(n)
            return row
        if n == 0:
            row[0] = self.spec.phase_matrix()
            return row
        row[0] = self.spec.negative_tail(k)
        row[1:n] = self.spec.a_range(1 - k, n - k)
        row[n] = self.spec.a_tail_from(n - k)
        return row

    def block_row_matrix(self, n: int) -> np.ndarray:
        """Return the LC-block-augmented rows from one shared window of A."""
        d = self.d
        spec = self.spec
        out = np.zeros(((n + 1) * d, (n + 1) * d))
        out[:d] = self.block_row(0, n).transpose(1, 0, 2).reshape(d, -1)
        # A(1-n..n-1); row k reads A(1-k..n-1-k) at offset n-k.
        window = spec.a_range(1 - n, n)
        tails = np.empty((n + 1, d, d))
        tails[n] = spec.positive_tail(n)
        for j in range(n - 1, -1, -1):
            tails[j] = tails[j + 1] + window[j + n - 1]
        for k in range(1, n + 1):
            blocks = np.empty((n + 1, d, d))
            blocks[0] = spec.negative_tail(k)
            blocks[1:n] = window[n - k : 2 * n - 1 - k]
            blocks[n] = tails[n - k]
            out[k * d : (k + 1) * d] = blocks.transpose(1, 0, 2).reshape(d, -1)
        return out

    def repeating_tail_profile(self, lo: int, hi: int) -> np.ndarray | None:
        """Return S(j), the sum of A(m) over m >= j, for j = lo..hi-1."""
        profile = np.empty((hi - lo + 1, self.d, self.d))
        profile[-1] = self.spec.a_tail_from(hi)
        window = self.spec.a_range(lo, hi)
        for j in range(hi - lo - 1, -1, -1):
            profile[j] = profile[j + 1] + window[j]
        return profile[:-1]

    @cached_property
    def varpi(self) -> np.ndarray:
        """Get the stationary vector of the phase matrix A."""
        return stationary_phase(self.spec.phase_matrix())


def _checked_table(blocks: dict[int, np.ndarray], d: int | None, what: str) -> tuple:
    if not blocks:
        raise InvalidArgumentError(f"{what} needs at least one block")
    keys = sorted(int(k) for k in blocks)
    first = np.asarray(blocks[keys[0]], dtype=float)
    d = first.shape[0] if d is None else d
    lo, hi = keys[0], keys[-1]
    table = np.zeros((hi - lo + 1, d, d))
    for key, block in blocks.items():
        array = np.asarray(block, dtype=float)
        if array.shape != (d, d):
            raise InvalidArgumentError(
                f"{what} block {key} has shape {array.shape}, expected {(d, d)}"
            )
        if (array < 0).any():
            raise InvalidArgumentError(f"{what} block {key} has negative entries")
        table[int(key) - lo] = array
    deviation = np.abs(table.sum(axis=(0, 2)) - 1.0).max()
    if deviation > ORDER_TOL:
        raise InvalidArgumentError(
            f"{what} blocks must sum to a stochastic matrix "
            f"(worst row deviation {deviation:.3g})"
        )
    return table, lo, d


def _range_reader(table: np.ndarray, lo: int) -> BlockRange:
    size, d, _ = table.shape

    def read(start: int, stop: int) -> np.ndarray:
        out = np.zeros((max(stop - start, 0), d, d))
        a, b = max(start, lo), min(stop, lo + size)
        if a < b:
            out[a - start : b - start] = table[a - lo : b - lo]
        return out

    return read


def explicit_gig1_spec(
    a_blocks: dict[int, np.ndarray],
    b_blocks: dict[int, np.ndarray] | None = None,
    name: str = "gig1-custom",
) -> GIG1Spec:
    """Build a finite-support spec from block tables.

    Args:
        a_blocks: A(k) keyed by the level increment k
        b_blocks: B(k) keyed by k >= 0; defaults to the reflecting
            boundary B(0) = underline-A(0), B(k) = A(k)
        name: Label used in reports

    Returns:
        The spec

    Raises:
        InvalidArgumentError: If a table is malformed or not stochastic

    """
    table, lo, d = _checked_table(a_blocks, None, "A")
    hi = lo + table.shape[0] - 1
    k = np.arange(lo, hi + 1)
    # tail_ge[i] = sum over table[i:], tail_le[i] = sum over table[:i+1]
    tail_ge = np.flip(np.cumsum(np.flip(table, axis=0), axis=0), axis=0)
    tail_le = np.cumsum(table, axis=0)
    zero = np.zeros((d, d))

    def positive_tail(m: int) -> np.ndarray:
        if m > hi:
            return zero.copy()
        return tail_ge[max(m, lo) - lo].copy()

    def negative_tail(m: int) -> np.ndarray:
        if -m < lo:
            return zero.copy()
        return tail_le[min(-m, hi) - lo].copy()

    def positive_tail_moment(m: int) -> np.ndarray:
        mask = k >= m
        return np.einsum("k,kij->ij", k[mask], table[mask])

    if b_blocks is None:
        boundary = {0: negative_tail(0)} | {
            int(j): table[j - lo] for j in range(max(lo, 1), hi + 1)
        }
    else:
        boundary = {int(j): np.asarray(b, dtype=float) for j, b in b_blocks.items()}
        if min(boundary) < 0:
            raise InvalidArgumentError("B blocks are indexed by k >= 0")
    b_table, b_lo, _ = _checked_table(boundary, d, "B")
    b_full = np.zeros((b_lo + b_table.shape[0], d, d))
    b_full[b_lo:] = b_table
    b_tail = np.flip(np.cumsum(np.flip(b_full, axis=0), axis=0), axis=0)

    def boundary_tail(m: int) -> np.ndarray:
        if m >= b_full.shape[0]:
            return zero.copy()
        return b_tail[max(m, 0)].copy()

    positive = k >= 1
    negative = k <= -1
    return GIG1Spec(
        d=d,
        a_range=_range_reader(table, lo),
        b_range=_range_reader(b_full, 0),
        positive_tail=positive_tail,
        negative_tail=negative_tail,
        boundary_tail=boundary_tail,
        first_moment_pos=np.einsum("k,kij->ij", k[positive], table[positive]),
        first_moment_neg=np.einsum("k,kij->ij", k[negative], table[negative]),
        positive_tail_moment=positive_tail_moment,
        lower_support=lo,
        upper_support=hi,
        boundary_support=b_full.shape[0] - 1,
        name=name,
    )


def underline_A(spec: GIG1Spec, k: int) -> np.ndarray:
    """Return underline-A(-k), the sum of A(l) over l <= -k.

    Raises:
        InvalidArgumentError: If k is negative

    """
    if k < 0:
        raise InvalidArgumentError(f"k must be nonnegative, got {k}")
    return spec.negative_tail(k)


def mean_drift_sigma(spec: GIG1Spec) -> float:
    """Return the mean increment varpi (sum of k A(k)) e."""
    varpi = stationary_phase(spec.phase_matrix())
    return float(varpi @ spec.drift_vector())


def modified_kernel(spec: GIG1Spec, N: int) -> GIG1Spec:
    """Fold the increments below -N into A_N(-N).

    The boundary row B is kept. The first block column of the modified
    kernel, the sum of A_N(l) over l <= -k, equals underline-A(-k) for
    k <= N and vanishes beyond, so every row stays stochastic.

    Raises:
        InvalidArgumentError: If N < 1

    """
    if N < 1:
        raise InvalidArgumentError(f"N must be at least 1, got {N}")
    if spec.lower_support is not None and spec.lower_support >= -N:
        return spec
    d = spec.d
    folded = spec.negative_tail(N)

    def a_range(lo: int, hi: int) -> np.ndarray:
        out = np.zeros((max(hi - lo, 0), d, d))
        start = max(lo, -N)
        if start < hi:
            out[start - lo :] = spec.a_range(start, hi)
        if lo <= -N < hi:
            out[-N - lo] = folded
        return out

    def negative_tail(m: int) -> np.ndarray:
        return spec.negative_tail(m) if m <= N else np.zeros((d, d))

    inner = spec.a_range(1 - N, 0)
    ks = np.arange(1 - N, 0)
    first_moment_neg = np.einsum("k,kij->ij", ks, inner) - N * folded
    return replace(
        spec,
        a_range=a_range,
        negative_tail=negative_tail,
        first_moment_neg=first_moment_neg,
        lower_support=-N,
        name=f"{spec.name} (N={N})",
    )


def sigma_N(spec: GIG1Spec, N: int) -> float:
    """Return the mean increment of the modified kernel."""
    return mean_drift_sigma(modified_kernel(spec, N))


def choose_N(spec: GIG1Spec, N_max: int) -> int:
    """Return the smallest N <= N_max whose modified kernel drifts down.

    Raises:
        InvalidArgumentError: If the kernel itself does not drift down
        SearchExhaustedError: If no N up to N_max works

    """
    sigma = mean_drift_sigma(spec)
    if not sigma < 0:
        raise InvalidArgumentError(f"mean drift must be negative, got {sigma:.6g}")
    trajectory = []
    for N in range(1, N_max + 1):
        value = sigma_N(spec, N)
        trajectory.append(value)
        if value < 0:
            logger.info("choose_N: N=%d with sigma_N=%.6g", N, value)
            return N
    raise SearchExhaustedError(
        f"no N <= {N_max} gives a negative modified drift", trajectory
    )
