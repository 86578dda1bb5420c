"""The two-phase chain with zeta-normalized power-law jumps.

Level increments k <= -1 have the antidiagonal block 2^(k-1) J. For
k >= 0, phase 0 moves to phase 1 with probability proportional to
(k+1)^(-beta1) and phase 1 moves to phase 0 with probability proportional
to (k+1)^(-beta2). The boundary row reflects the negative mass into
level 0. Every constant of the drift certificate has a closed form here.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from lcblock_bounds.bounds import (
    BoundReport,
    BoundVariant,
    TolerancePlan,
    bound_extended,
)
from lcblock_bounds.drift import PhiSpec
from lcblock_bounds.errors import ContractError, DomainError, InvalidArgumentError
from lcblock_bounds.gig1.envelope import power_law_envelope
from lcblock_bounds.gig1.pipeline import PipelineResult, moment_tail_ratio, run_pipeline
from lcblock_bounds.gig1.spec import GIG1Spec
from lcblock_bounds.vfamily import PolynomialV

logger = logging.getLogger(__name__)

ZETA_FLOOR = 1.0 + 1e-6
B_SERIES_TERMS = 1 << 16
AGREEMENT_TOL = 1e-12
ANTIDIAGONAL = np.array([[0.0, 1.0], [1.0, 0.0]])


def zeta(s: float) -> float:
    """Return the Riemann zeta function at s > 1.

    Raises:
        DomainError: If s <= 1 + 1e-6

    """
    if not s > ZETA_FLOOR:
        raise DomainError(f"zeta is evaluated for s > 1, got {s}")
    return float(mpmath.zeta(s))


@lru_cache(maxsize=4096)
def _hurwitz(s: float, a: int) -> float:
    return float(mpmath.zeta(s, a))


def zeta_bracket(s: float, terms: int) -> tuple[float, float]:
    """Enclose zeta(s) by a partial sum and the two integral tail bounds.

    Returns:
        (lower, upper) with the first ``terms`` terms summed exactly

    """
    if not s > ZETA_FLOOR:
        raise DomainError(f"zeta is evaluated for s > 1, got {s}")
    if terms < 1:
        raise InvalidArgumentError(f"terms must be positive, got {terms}")
    n = np.arange(1, terms + 1, dtype=float)
    partial = float(np.flip(n ** (-s)).sum())
    lower = partial + (terms + 1.0) ** (1.0 - s) / (s - 1.0)
    upper = partial + float(terms) ** (1.0 - s) / (s - 1.0)
    return lower, upper


def _check_betas(beta1: float, beta2: float) -> None:
    if not 2 < beta1 < beta2:
        raise InvalidArgumentError(
            f"need 2 < beta1 < beta2, got beta1={beta1}, beta2={beta2}"
        )


def build_special_spec(beta1: float, beta2: float) -> GIG1Spec:
    """Build the chain for exponents 2 < beta1 < beta2.

    Raises:
        InvalidArgumentError: If the exponents are out of range

    """
    _check_betas(beta1, beta2)
    betas = (float(beta1), float(beta2))
    z = (zeta(betas[0]), zeta(betas[1]))
    zm = (zeta(betas[0] - 1.0), zeta(betas[1] - 1.0))

    def a_range(lo: int, hi: int) -> np.ndarray:
        k = np.arange(lo, hi, dtype=float)
        out = np.zeros((k.size, 2, 2))
        neg = k < 0
        out[neg] = np.exp2(k[neg] - 1.0)[:, None, None] * ANTIDIAGONAL
        pos = ~neg
        out[pos, 0, 1] = 0.5 * (k[pos] + 1.0) ** -betas[0] / z[0]
        out[pos, 1, 0] = 0.5 * (k[pos] + 1.0) ** -betas[1] / z[1]
        return out

    def positive_tail(m: int) -> np.ndarray:
        m = max(int(m), 0)
        out = np.zeros((2, 2))
        out[0, 1] = 0.5 * _hurwitz(betas[0], m + 1) / z[0]
        out[1, 0] = 0.5 * _hurwitz(betas[1], m + 1) / z[1]
        return out

    def negative_tail(m: int) -> np.ndarray:
        if m <= 0:
            return 0.5 * ANTIDIAGONAL + a_range(0, 1)[0]
        return 2.0**-m * ANTIDIAGONAL

    def b_range(lo: int, hi: int) -> np.ndarray:
        out = a_range(lo, hi)
        if lo <= 0 < hi:
            out[-lo] = negative_tail(0)
        return out

    def boundary_tail(m: int) -> np.ndarray:
        if m <= 0:
            return ANTIDIAGONAL.copy()
        return positive_tail(m)

    def positive_tail_moment(m: int) -> np.ndarray:
        m = max(int(m), 0)
        out = np.zeros((2, 2))
        for (i, j), beta, zi in (((0, 1), betas[0], z[0]), ((1, 0), betas[1], z[1])):
            out[i, j] = 0.5 * (_hurwitz(beta - 1.0, m + 1) - _hurwitz(beta, m + 1)) / zi
        return out

    first_pos = np.zeros((2, 2))
    first_pos[0, 1] = 0.5 * (zm[0] - z[0]) / z[0]
    first_pos[1, 0] = 0.5 * (zm[1] - z[1]) / z[1]
    envelope = power_law_envelope([0.5 / z[0], 0.5 / z[1]], list(betas))
    return GIG1Spec(
        d=2,
        a_range=a_range,
        b_range=b_range,
        positive_tail=positive_tail,
        negative_tail=negative_tail,
        boundary_tail=boundary_tail,
        first_moment_pos=first_pos,
        first_moment_neg=-ANTIDIAGONAL,
        positive_tail_moment=positive_tail_moment,
        envelope=envelope,
        boundary_envelope=envelope,
        name=f"zeta({beta1:g}, {beta2:g})",
    )


def sigma_closed_form(beta1: float, beta2: float) -> float:
    """Return the mean drift (r1 + r2 - 6)/4 with r = zeta(beta-1)/zeta(beta)."""
    _check_betas(beta1, beta2)
    r1 = zeta(beta1 - 1.0) / zeta(beta1)
    r2 = zeta(beta2 - 1.0) / zeta(beta2)
    return 0.25 * (r1 + r2 - 6.0)


def sigma_1_closed_form(beta1: float, beta2: float) -> float:
    """Return the mean drift of the kernel folded at -1."""
    return sigma_closed_form(beta1, beta2) + 0.5


@dataclass(frozen=True)
class SpecialCaseParams:
    """Closed-form constants of the drift certificate.

    K is the ceiling reading max(K0, ceil((C_i/kappa)^(1/(beta_i-2))));
    K_literal keeps the floor inside the power. The trailing term of b
    uses K, recorded in flags.
    """

    beta1: float
    beta2: float
    beta0: float
    kappa: float
    epsilon: float
    delta0: float
    x0: float
    K0: int
    rho: float
    C1: float
    C2: float
    K: int
    K_literal: float
    b: float
    B: float
    c_breve: float
    flags: list[str] = field(default_factory=list)

    @property
    def V1(self) -> float:
        """Get V(1) = (1 + x0)^beta0."""
        return (1.0 + self.x0) ** self.beta0

    @property
    def two_K_b(self) -> float:
        """Get 2^K b, which equals B."""
        return math.ldexp(self.b, self.K)

    def to_dict(self) -> dict:
        """Convert the parameters to a plain dictionary."""
        return asdict(self)


def _b_series(K: int, x0: float, beta0: float, beta: float) -> float:
    """Upper bound on the sum over l >= 0 of (K + l + x0)^beta0 (l + 1)^(-beta).

    The summand is decreasing, so the remainder after T terms is at most
    the integral from T - 1.
    """
    ell = np.arange(B_SERIES_TERMS, dtype=float)
    terms = (K + ell + x0) ** beta0 * (ell + 1.0) ** -beta
    head = float(np.flip(terms).sum())
    start = B_SERIES_TERMS - 1
    tail = mpmath.quad(
        lambda x: (K + x + x0) ** beta0 * (x + 1) ** -beta, [start, mpmath.inf]
    )
    return head + float(tail)


def check_parameters(beta1: float, beta2: float, beta0: float) -> None:
    """Check 2 < beta1 < beta2 and 1 < beta0 < beta1 - 1.

    Raises:
        InvalidArgumentError: If either condition fails

    """
    _check_betas(beta1, beta2)
    if not 1 < beta0 < beta1 - 1:
        raise InvalidArgumentError(
            f"beta0 must satisfy 1 < beta0 < beta1 - 1 = {beta1 - 1:g}, got {beta0}"
        )


def closed_form_params(beta1: float, beta2: float, beta0: float) -> SpecialCaseParams:
    """Evaluate every closed-form constant.

    Raises:
        InvalidArgumentError: If 2 < beta1 < beta2 or
            1 < beta0 < beta1 - 1 fails

    """
    check_parameters(beta1, beta2, beta0)
    z1, z2 = zeta(beta1), zeta(beta2)
    ratio = zeta(beta1 - 1.0) / z1
    kappa = 0.25 * (1.0 - ratio / 2.0)
    epsilon = 0.5 * (2.0 / ratio - 1.0)
    delta0 = (1.0 + epsilon) ** (1.0 / (beta0 - 1.0)) - 1.0
    x0 = 1.0 / (1.0 - (1.0 - epsilon) ** (1.0 / (beta0 - 1.0)))
    K0 = 1
    rho = max(1.0 + 1.0 / delta0, x0)

    def C(beta: float, z: float) -> float:
        return (
            rho**beta0
            * delta0 ** (-beta + beta0 + 1.0)
            / (2.0 * beta0 * (beta - beta0 - 1.0) * z)
        )

    C1, C2 = C(beta1, z1), C(beta2, z2)
    K = max(
        K0,
        math.ceil((C1 / kappa) ** (1.0 / (beta1 - 2.0))),
        math.ceil((C2 / kappa) ** (1.0 / (beta2 - 2.0))),
    )
    K_literal = max(
        math.floor(C1 / kappa) ** (1.0 / (beta1 - 2.0)),
        math.floor(C2 / kappa) ** (1.0 / (beta2 - 2.0)),
    )
    series = max(
        0.5 / z1 * _b_series(K, x0, beta0, beta1),
        0.5 / z2 * _b_series(K, x0, beta0, beta2),
    )
    b = series + kappa * beta0 * (K + x0) ** (beta0 - 1.0)
    B = math.ldexp(b, K)
    c_breve = (B + 1.0) ** (-1.0 + 1.0 / beta0)
    flags = ["b trailing term evaluated at K", "K from the ceiling reading"]
    logger.info("closed form: kappa=%.6g, K=%d, b=%.6g", kappa, K, b)
    return SpecialCaseParams(
        beta1, beta2, beta0, kappa, epsilon, delta0, x0, K0, rho,
        C1, C2, K, K_literal, b, B, c_breve, flags,
    )  # fmt: skip


def _mixing(params: SpecialCaseParams, m: int) -> float:
    p = params
    base = p.kappa * p.c_breve * (m - 1) + 1.0
    scale = 8.0 / p.c_breve / (p.kappa * p.beta0 * base ** (p.beta0 - 1.0))
    return scale * (p.V1 + p.two_K_b)


def _truncation(params: SpecialCaseParams, m: int, n: int) -> float:
    p = params
    return 4.0 * m * p.b / (p.kappa * p.beta0 * (n + p.x0) ** (p.beta0 - 1.0))


def bound_special(params: SpecialCaseParams, m: int, n: int) -> BoundReport:
    """Closed-form bound with M = 1 and d = 2.

    Raises:
        InvalidArgumentError: If m or n is below 1
        ContractError: If the generic bound disagrees beyond 1e-12

    """
    if m < 1 or n < 1:
        raise InvalidArgumentError(f"m and n must be positive, got m={m}, n={n}")
    mixing, truncation = _mixing(params, m), _truncation(params, m, n)
    slope = params.kappa * params.beta0 * (n + params.x0) ** (params.beta0 - 1)
    phi_v_n = np.full(2, slope)
    generic = bound_extended(
        m, n, 1, params.b, params.B, params.K, params.V1,
        PhiSpec.power(params.kappa, params.beta0), phi_v_n,
    )  # fmt: skip
    value = mixing + truncation
    if abs(generic.bound_value - value) > AGREEMENT_TOL * value:
        raise ContractError(
            f"closed-form bound {value:.17g} disagrees with {generic.bound_value:.17g}"
        )
    return BoundReport(m, n, value, mixing, truncation, BoundVariant.SPECIAL)


def plan_tolerance_special(params: SpecialCaseParams, E: float) -> TolerancePlan:
    """Return the (m0, n0) of the closed-form ceilings for tolerance E.

    Raises:
        InvalidArgumentError: If E is not in (0, 2)

    """
    if not 0 < E < 2:
        raise InvalidArgumentError(f"tolerance must be in (0, 2), got {E}")
    p = params
    inner = 16.0 / p.c_breve * (p.V1 + p.two_K_b) / (p.kappa * p.beta0 * E)
    m0 = max(
        1,
        math.ceil((inner ** (1.0 / (p.beta0 - 1.0)) - 1.0) / (p.kappa * p.c_breve)) + 1,
    )
    reach = (8.0 * m0 * p.b / (p.kappa * p.beta0 * E)) ** (1.0 / (p.beta0 - 1.0))
    n0 = max(1, math.ceil(reach - p.x0))
    logger.info("closed-form plan for E=%g: m0=%d, n0=%d", E, m0, n0)
    return TolerancePlan(m0, n0)


@dataclass(frozen=True, eq=False)
class TailCheckReport:
    """Per-level outcome of the K-defining tail inequality."""

    levels: np.ndarray
    quantity: np.ndarray
    intermediate: np.ndarray
    kappa: float
    passed: bool

    def to_dict(self) -> dict:
        """Convert the report to a plain dictionary."""
        gap = self.kappa - self.quantity.max(axis=1)
        return {
            "passed": self.passed,
            "levels": [int(self.levels[0]), int(self.levels[-1])],
            "worst_slack": float(gap.min()),
        }


def tail_inequality_check(
    params: SpecialCaseParams, k_from: int, k_to: int
) -> TailCheckReport:
    """Check quantity <= C_i k^(2 - beta_i) <= kappa on levels k_from..k_to.

    The quantity is (1/V'(k)) times the sum over l > floor(delta0 k) of
    V(k + l) A(l) e, evaluated through a certified upper estimate.

    Raises:
        InvalidArgumentError: If k_from <= K or the range is empty

    """
    if k_from <= params.K:
        raise InvalidArgumentError(f"k_from must exceed K={params.K}, got {k_from}")
    if k_to < k_from:
        raise InvalidArgumentError(f"empty level range {k_from}..{k_to}")
    spec = build_special_spec(params.beta1, params.beta2)
    vfam = PolynomialV(params.beta0, params.x0)
    levels = np.arange(k_from, k_to + 1)
    quantity = np.stack(
        [moment_tail_ratio(vfam, spec, int(k), params.delta0) for k in levels]
    )
    k = levels.astype(float)
    intermediate = np.stack(
        [
            params.C1 * k ** (2.0 - params.beta1),
            params.C2 * k ** (2.0 - params.beta2),
        ],
        axis=1,
    )
    passed = bool(
        (quantity <= intermediate).all()
        and (intermediate <= params.kappa + AGREEMENT_TOL).all()
    )
    log = logger.info if passed else logger.warning
    log("tail inequality on %d..%d: %s", k_from, k_to, "pass" if passed else "fail")
    return TailCheckReport(levels, quantity, intermediate, params.kappa, passed)


def special_pipeline(
    beta1: float, beta2: float, beta0: float, window: int | None = None
) -> PipelineResult:
    """Run the generic pipeline on the chain with the closed-form kappa and epsilon."""
    params = closed_form_params(beta1, beta2, beta0)
    spec = build_special_spec(beta1, beta2)
    options = {} if window is None else {"window": window}
    return run_pipeline(
        spec,
        lambda epsilon, L: PolynomialV.for_epsilon(beta0, epsilon, L),
        kappa_epsilon=(params.kappa, params.epsilon),
        **options,
    )
