"""Multi-step increments of a modified GI/G/1-type kernel.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from lcblock_bounds.errors import (
    ContractError,
    InvalidArgumentError,
    ResourceError,
    SearchExhaustedError,
)
from lcblock_bounds.gig1.envelope import weighted_tail
from lcblock_bounds.gig1.spec import GIG1Spec, mean_drift_sigma
from lcblock_bounds.vfamily import LinearV

logger = logging.getLogger(__name__)

POS_TAIL_TOL = 1e-14
LEVEL_CAP = 1 << 13
EPSILON_GRID = tuple(round(0.05 * i, 2) for i in range(1, 20))


@dataclass(frozen=True, eq=False)
class ConvolutionKernel:
    """The M-fold convolution of a kernel with finite negative support.

    Attributes:
        M: Number of steps
        lower: Smallest increment, -M N
        blocks: A^{*M}(lower..lower + len - 1)
        neglected_mass: Per-phase bound on the mass above the last block
        neglected_moment: Per-phase bound on the first moment above it

    """

    M: int
    lower: int
    blocks: np.ndarray
    neglected_mass: np.ndarray
    neglected_moment: np.ndarray

    @property
    def upper(self) -> int:
        """Get the largest explicit increment."""
        return self.lower + self.blocks.shape[0] - 1

    def block(self, k: int) -> np.ndarray:
        """Return A^{*M}(k), zero outside the explicit range."""
        if k < self.lower or k > self.upper:
            return np.zeros(self.blocks.shape[1:])
        return self.blocks[k - self.lower]

    def positive_moment(self) -> np.ndarray:
        """Return an upper bound on the sum of l A^{*M}(l) e over l >= 0."""
        ks = np.arange(self.lower, self.upper + 1)
        mask = ks >= 0
        explicit = np.einsum("k,kij->i", ks[mask], self.blocks[mask])
        return explicit + self.neglected_moment


def multi_step_drift(spec: GIG1Spec, M: int) -> np.ndarray:
    """Return the sum of l A^{*M}(l) e, which equals sum_{j<M} A^j m1."""
    if M < 1:
        raise InvalidArgumentError(f"M must be at least 1, got {M}")
    a = spec.phase_matrix()
    step = spec.drift_vector()
    total = np.zeros(spec.d)
    for _ in range(M):
        total += step
        step = a @ step
    return total


def _row_tail_max(spec: GIG1Spec, m: int) -> float:
    return float(spec.positive_tail(max(m, 0)).sum(axis=1).max())


def _row_moment_max(spec: GIG1Spec, m: int) -> float:
    """Largest per-phase bound on the sum of l A(l) e over l >= m."""
    if spec.positive_tail_moment is not None:
        return float(spec.positive_tail_moment(max(m, 0)).sum(axis=1).max())
    if spec.envelope is not None:
        return float(weighted_tail(spec.envelope, LinearV(), 0.0, m).max())
    return float("inf")


def neglected_moment_bound(spec: GIG1Spec, M: int, cut: int) -> float:
    """Bound the first moment of M summed increments on the event one exceeds cut.

    With S the sum of increments X_1..X_M, S 1{S > (cut - 1) M} is at most
    the sum over j, k of X_j^+ 1{X_k >= cut}. Given the past, each step
    is drawn from a row of A(.), so the j = k terms are at most the tail
    moment m(cut) and the others at most mu+ g(cut), with mu+ the largest
    positive mean and g the largest tail mass.
    """
    mu_plus = float(spec.first_moment_pos.sum(axis=1).max())
    g = _row_tail_max(spec, cut)
    return M * _row_moment_max(spec, cut) + M * (M - 1) * mu_plus * g


def convolve_power(
    spec_N: GIG1Spec,
    M: int,
    pos_tail_tol: float = POS_TAIL_TOL,
    level_cap: int = LEVEL_CAP,
) -> GIG1Spec | ConvolutionKernel:
    """Return the M-fold convolution of the increments of spec_N.

    For M = 1 the GIG1Spec is returned unchanged. Otherwise the convolution is
    tabulated from -M N up to the smallest L with M g(L/M) <= pos_tail_tol,
    where g(m) is the largest per-phase tail mass from m on: a sum of M
    increments exceeds L only if one increment exceeds L/M. Blocks with
    k <= 0 are exact because L >= (M - 1) N.

    Raises:
        InvalidArgumentError: If M < 1 or the negative support is unbounded
        ResourceError: If the tolerance needs more than level_cap levels

    """
    if M < 1:
        raise InvalidArgumentError(f"M must be at least 1, got {M}")
    if M == 1:
        return spec_N
    if spec_N.lower_support is None:
        raise InvalidArgumentError("convolution needs a finite negative support")
    N = max(-spec_N.lower_support, 0)
    if spec_N.upper_support is not None:
        per_step = spec_N.upper_support
    else:
        per_step = 0
        while M * _row_tail_max(spec_N, per_step + 1) > pos_tail_tol:
            per_step = max(2 * per_step, 1)
            if M * per_step > level_cap:
                raise ResourceError(
                    f"positive tail tolerance {pos_tail_tol:.3g} needs more than "
                    f"{level_cap} levels"
                )
    upper = max(M * per_step, (M - 1) * N)
    if upper + M * N + 1 > level_cap:
        raise ResourceError(f"convolution range exceeds {level_cap} levels")

    step = spec_N.a_range(-N, upper + 1)
    current = step.copy()
    lower = -N
    for j in range(2, M + 1):
        new_lower = -j * N
        nxt = np.zeros((upper - new_lower + 1, spec_N.d, spec_N.d))
        for s in range(step.shape[0]):
            shift = s - N
            # current covers lower..upper; targets lower+shift.. clipped to upper
            count = upper - (lower + shift) + 1
            if count <= 0 or not step[s].any():
                continue
            count = min(count, current.shape[0])
            start = lower + shift - new_lower
            nxt[start : start + count] += current[:count] @ step[s]
        current, lower = nxt, new_lower

    if spec_N.upper_support is not None and per_step >= spec_N.upper_support:
        mass = np.zeros(spec_N.d)
        moment = np.zeros(spec_N.d)
    else:
        cut = upper // M + 1
        g = _row_tail_max(spec_N, cut)
        mass = np.full(spec_N.d, M * g)
        moment = np.full(spec_N.d, neglected_moment_bound(spec_N, M, cut))
    logger.debug("convolved M=%d over %d..%d", M, lower, upper)
    return ConvolutionKernel(M, lower, current, mass, moment)


def choose_M0(spec_N: GIG1Spec, M_max: int) -> int:
    """Return the smallest M with every entry of the M-step drift negative.

    Raises:
        InvalidArgumentError: If the modified kernel does not drift down
        SearchExhaustedError: If no M up to M_max works; the trajectory
            lists the drift vectors

    """
    sigma = mean_drift_sigma(spec_N)
    if not sigma < 0:
        raise InvalidArgumentError(
            f"modified kernel mean drift must be negative, got {sigma:.6g}"
        )
    trajectory = []
    for M in range(1, M_max + 1):
        drift = multi_step_drift(spec_N, M)
        trajectory.append(drift.tolist())
        if (drift < 0).all():
            logger.info("choose_M0: M0=%d", M)
            return M
    raise SearchExhaustedError(
        f"the {M_max}-step drift still has a nonnegative entry", trajectory
    )


class KappaEpsilon(NamedTuple):
    """Drift margin kappa, split parameter epsilon and per-phase slack."""

    kappa: float
    epsilon: float
    slack: np.ndarray


def _moments(spec_N: GIG1Spec, M: int, pos_tail_tol: float) -> tuple:
    total = multi_step_drift(spec_N, M)
    if M == 1:
        positive = spec_N.first_moment_pos.sum(axis=1)
    else:
        positive = convolve_power(spec_N, M, pos_tail_tol).positive_moment()
    return total, positive


def kappa_epsilon_slack(
    spec_N: GIG1Spec,
    M: int,
    kappa: float,
    epsilon: float,
    pos_tail_tol: float = POS_TAIL_TOL,
) -> np.ndarray:
    """Return -2 kappa - [(1 - eps) total + 2 eps positive] per phase."""
    total, positive = _moments(spec_N, M, pos_tail_tol)
    return -2.0 * kappa - ((1.0 - epsilon) * total + 2.0 * epsilon * positive)


def choose_kappa_epsilon(
    spec_N: GIG1Spec,
    M: int,
    grid: tuple[float, ...] = EPSILON_GRID,
    pos_tail_tol: float = POS_TAIL_TOL,
) -> KappaEpsilon:
    """Pick epsilon on a grid to maximize the drift margin kappa.

    Raises:
        ContractError: If no grid point gives a positive kappa

    """
    total, positive = _moments(spec_N, M, pos_tail_tol)
    best = None
    for eps in grid:
        combined = (1.0 - eps) * total + 2.0 * eps * positive
        kappa = float(np.min(-combined / 2.0))
        if best is None or kappa > best.kappa:
            best = KappaEpsilon(kappa, eps, -2.0 * kappa - combined)
    if best is None or not best.kappa > 0:
        raise ContractError(
            f"no epsilon on the grid gives a positive kappa for M={M}"
        )
    logger.info("kappa=%.6g at epsilon=%.2f", best.kappa, best.epsilon)
    return best
