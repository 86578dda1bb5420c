"""Total-variation error bounds for truncated stationary vectors.

Every bound is a mixing term, decreasing in m, plus a truncation term
that grows with m and shrinks with n.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import asdict, dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike

from lcblock_bounds.drift import PhiSpec, c_phi_B, r_phi
from lcblock_bounds.errors import (
    ContractError,
    InvalidArgumentError,
    ToleranceUnreachableError,
)

logger = logging.getLogger(__name__)

SEARCH_CAP = 10**300


class BoundVariant(Enum):
    """Which displayed bound a report comes from."""

    MAIN_A = "main-a"
    MAIN_B = "main-b"
    EXTENDED = "extended"
    EXTENDED_K0 = "extended-K0"
    GIG1 = "gig1"
    GIG1_K0 = "gig1-K0"
    SPECIAL = "special"


@dataclass(frozen=True)
class BoundReport:
    """A bound value split into its two terms."""

    m: int
    n: int
    bound_value: float
    term_mixing: float
    term_truncation: float
    variant: BoundVariant

    def to_dict(self) -> dict:
        """Convert the report to a plain dictionary."""
        data = asdict(self)
        data["variant"] = self.variant.value
        return data


def _report(
    m: int, n: int, mixing: float, truncation: float, variant: BoundVariant
) -> BoundReport:
    if m < 1 or n < 1:
        raise InvalidArgumentError(f"m and n must be positive, got m={m}, n={n}")
    return BoundReport(m, n, mixing + truncation, mixing, truncation, variant)


def bound_main_a(
    m: int, n: int, v1_varpi: float, phi: PhiSpec, boundary_mass: float
) -> BoundReport:
    """Bound with the truncation term 2m times the mass on level n.

    Args:
        m: Mixing parameter
        n: Truncation level
        v1_varpi: Phase average of v at level 1
        phi: Drift function
        boundary_mass: Mass of the truncated stationary vector on level n

    Returns:
        The bound report

    """
    mixing = 8.0 * v1_varpi / r_phi(phi, m - 1)
    return _report(m, n, mixing, 2.0 * m * boundary_mass, BoundVariant.MAIN_A)


def bound_main_b(
    m: int, n: int, v1_varpi: float, phi: PhiSpec, b: float, phi_v_n: ArrayLike
) -> BoundReport:
    """Bound with the truncation term 2mb times the sum of 1/phi(v(n, i))."""
    mixing = 8.0 * v1_varpi / r_phi(phi, m - 1)
    truncation = 2.0 * m * b * float(np.sum(1.0 / np.asarray(phi_v_n, dtype=float)))
    return _report(m, n, mixing, truncation, BoundVariant.MAIN_B)


def bound_extended(
    m: int,
    n: int,
    M: int,
    b: float,
    B: float | None,
    K: int,
    v1_varpi: float,
    phi: PhiSpec,
    phi_v_n: ArrayLike,
) -> BoundReport:
    """Bound under an M-step drift condition with drift set of size K + 1.

    For K = 0 the mixing term is 8 v(1, varpi) / r_phi(m - 1). For K > 0
    the rate is deflated by c(x) = phi(1)/phi(B + 1) x and the mixing term
    becomes 8 (v(1, varpi) + B) / (c(1) r_phi(c(m - 1))).

    Raises:
        ContractError: If K > 0 and B is missing

    """
    truncation = 2.0 * m * M * b * float(np.sum(1.0 / np.asarray(phi_v_n, dtype=float)))
    if K == 0:
        mixing = 8.0 * v1_varpi / r_phi(phi, m - 1)
        return _report(m, n, mixing, truncation, BoundVariant.EXTENDED_K0)
    if B is None:
        raise ContractError("B is required when K > 0")
    c1 = c_phi_B(phi, B, 1.0)
    mixing = 8.0 / c1 / r_phi(phi, c_phi_B(phi, B, m - 1)) * (v1_varpi + B)
    return _report(m, n, mixing, truncation, BoundVariant.EXTENDED)


def bound_gig1(
    m: int,
    n: int,
    M: int,
    b: float,
    B: float | None,
    K: int,
    V1: float,
    kappa: float,
    V_prime_n: float,
    d: int,
    phi: PhiSpec,
) -> BoundReport:
    """Bound for a GI/G/1-type kernel with v(k) = V(k) e.

    The truncation term is 2mMbd / (kappa V'(n)), since phi(v(n, i)) =
    kappa V'(n) in every phase.
    """
    phi_v_n = np.full(d, kappa * V_prime_n)
    report = bound_extended(m, n, M, b, B, K, V1, phi, phi_v_n)
    variant = BoundVariant.GIG1_K0 if K == 0 else BoundVariant.GIG1
    return BoundReport(
        report.m,
        report.n,
        report.bound_value,
        report.term_mixing,
        report.term_truncation,
        variant,
    )


def minimize_over_m(
    n: int, bound_fn: Callable[[int], float], m_max: int
) -> tuple[int, float]:
    """Scan m = 1..m_max and return the smallest minimizer and its value.

    Raises:
        InvalidArgumentError: If m_max < 1

    """
    if m_max < 1:
        raise InvalidArgumentError(f"m_max must be at least 1, got {m_max}")
    best_m, best = 1, bound_fn(1)
    for m in range(2, m_max + 1):
        value = bound_fn(m)
        if value < best:
            best_m, best = m, value
    logger.debug("n=%d: best m=%d with bound %.6g", n, best_m, best)
    return best_m, best


class TolerancePlan(NamedTuple):
    """Smallest (m0, n0) meeting a tolerance with an even split."""

    m0: int
    n0: int


def _smallest(predicate: Callable[[int], bool], cap: int) -> int | None:
    """Smallest integer x in [1, cap] with predicate(x), for monotone predicates."""
    if predicate(1):
        return 1
    lo, hi = 1, 2
    while not predicate(hi):
        if hi >= cap:
            return None
        lo, hi = hi, min(hi * 2, cap)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if predicate(mid):
            hi = mid
        else:
            lo = mid
    return hi


def tolerance_plan(
    target_E: float,
    mixing_fn: Callable[[int], float],
    truncation_fn: Callable[[int, int], float],
    n_max: int | None = None,
) -> TolerancePlan:
    """Find the smallest m0 and then n0 with each term at most E/2.

    Thresholds are located by doubling and integer bisection, which stays
    exact for thresholds far beyond machine integers.

    Raises:
        InvalidArgumentError: If target_E is not in (0, 2)
        ToleranceUnreachableError: If no n up to n_max meets E/2

    """
    if not 0 < target_E < 2:
        raise InvalidArgumentError(f"tolerance must be in (0, 2), got {target_E}")
    half = target_E / 2.0
    m0 = _smallest(lambda m: mixing_fn(m) <= half, SEARCH_CAP)
    if m0 is None:
        raise ToleranceUnreachableError(
            "mixing term stays above the tolerance", mixing_fn(SEARCH_CAP) - half
        )
    cap = SEARCH_CAP if n_max is None else n_max
    n0 = _smallest(lambda n: truncation_fn(m0, n) <= half, cap)
    if n0 is None:
        residual = truncation_fn(m0, cap) - half
        raise ToleranceUnreachableError(
            f"truncation term exceeds {half:.6g} by {residual:.6g} at n={cap}",
            residual,
        )
    logger.info("tolerance %.6g met at m0=%d, n0=%d", target_E, m0, n0)
    return TolerancePlan(m0, n0)
