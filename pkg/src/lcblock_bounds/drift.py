"""Subgeometric drift functions and numerical drift verification.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
from numpy.typing import ArrayLike
from scipy.integrate import quad
from scipy.optimize import brentq

from lcblock_bounds.blockmatrix import BlockKernel, BlockVector
from lcblock_bounds.errors import ContractError, DomainError, InvalidArgumentError
from lcblock_bounds.truncation import northwest_corner

logger = logging.getLogger(__name__)

QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-13
QUAD_LIMIT = 1_000_000
INVERSE_TOL = 1e-10
BRACKET_CAP = 1e300
SLACK_TOL = 1e-10
DEFAULT_WINDOW = 2000
CERTIFICATE_SAMPLE = 1000

Evaluator = Callable[[ArrayLike], Any]
TailBound = Callable[[int, int], np.ndarray]


@dataclass(frozen=True)
class PhiSpec:
    """Drift function phi on [1, inf) with optional closed forms.

    Attributes:
        phi: Evaluator of phi (vectorized)
        phi_prime: Evaluator of the derivative of phi
        closed_form_H: Exact H_phi, if known
        closed_form_H_inverse: Exact inverse of H_phi, if known
        closed_form_r: Exact r_phi on [0, inf), if known
        name: Label used in reports

    """

    phi: Evaluator
    phi_prime: Evaluator
    closed_form_H: Evaluator | None = None
    closed_form_H_inverse: Evaluator | None = None
    closed_form_r: Evaluator | None = None
    name: str = "phi"

    def numeric(self) -> PhiSpec:
        """Return the same phi with every closed form removed."""
        return replace(
            self,
            closed_form_H=None,
            closed_form_H_inverse=None,
            closed_form_r=None,
            name=f"{self.name} (numeric)",
        )

    @classmethod
    def constant(cls, c: float) -> PhiSpec:
        """Create the constant drift function phi = c."""
        if c <= 0:
            raise InvalidArgumentError(f"constant drift must be positive, got {c}")
        return cls(
            phi=lambda t: np.full_like(np.asarray(t, dtype=float), c),
            phi_prime=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
            closed_form_H=lambda x: (np.asarray(x, dtype=float) - 1.0) / c,
            closed_form_H_inverse=lambda y: c * np.asarray(y, dtype=float) + 1.0,
            closed_form_r=lambda x: np.full_like(np.asarray(x, dtype=float), c),
            name=f"constant({c})",
        )

    @classmethod
    def power(cls, kappa: float, beta0: float) -> PhiSpec:
        """Create phi(t) = kappa beta0 t^(1 - 1/beta0).

        This is the drift function induced by V(x) = (x + x0)^beta0; its
        H_phi, inverse and r_phi are available in closed form.
        """
        if kappa <= 0 or beta0 <= 1:
            raise InvalidArgumentError(
                f"need kappa > 0 and beta0 > 1, got kappa={kappa}, beta0={beta0}"
            )
        q = 1.0 / beta0

        def phi(t: ArrayLike) -> Any:
            return kappa * beta0 * np.power(t, 1.0 - q)

        def phi_prime(t: ArrayLike) -> Any:
            return kappa * (beta0 - 1.0) * np.power(t, -q)

        def h(x: ArrayLike) -> Any:
            return (np.power(x, q) - 1.0) / kappa

        def h_inverse(y: ArrayLike) -> Any:
            return np.power(kappa * np.asarray(y, dtype=float) + 1.0, beta0)

        def r(x: ArrayLike) -> Any:
            y = kappa * np.asarray(x, dtype=float) + 1.0
            return kappa * beta0 * np.power(y, beta0 - 1.0)

        return cls(
            phi=phi,
            phi_prime=phi_prime,
            closed_form_H=h,
            closed_form_H_inverse=h_inverse,
            closed_form_r=r,
            name=f"power(kappa={kappa:.6g}, beta0={beta0:.6g})",
        )


@dataclass(frozen=True)
class PhiCheck:
    """Outcome of the sampled checks on a drift function."""

    nondecreasing: bool
    concave: bool
    derivative_vanishing: bool

    @property
    def passed(self) -> bool:
        """Whether every sampled property holds."""
        return self.nondecreasing and self.concave and self.derivative_vanishing


def check_phi_spec(phi: PhiSpec, samples: int = 200) -> PhiCheck:
    """Check monotonicity, concavity and a vanishing derivative on samples."""
    t = np.geomspace(1.0, 1e6, samples)
    values = np.asarray(phi.phi(t), dtype=float)
    nondecreasing = bool((np.diff(values) >= -1e-12).all())
    mid = np.asarray(phi.phi(0.5 * (t[:-1] + t[1:])), dtype=float)
    concave = bool((mid >= 0.5 * (values[:-1] + values[1:]) - 1e-10).all())
    slope = np.asarray(phi.phi_prime(t), dtype=float)
    vanishing = bool(
        slope[-1] < slope[0]
        and (np.diff(slope) <= 1e-12 * (1.0 + np.abs(slope[:-1]))).all()
    )
    return PhiCheck(nondecreasing, concave, vanishing)


def H_phi(phi: PhiSpec, x: float) -> float:
    """Return the integral of 1/phi over [1, x].

    Without a closed form the integral is taken in the variable log y,
    which keeps the integrand smooth across many orders of magnitude.

    Raises:
        DomainError: If x < 1

    """
    if x < 1:
        raise DomainError(f"H_phi is defined for x >= 1, got {x}")
    if phi.closed_form_H is not None:
        return float(phi.closed_form_H(x))
    if x == 1:
        return 0.0
    value, error = quad(
        lambda u: math.exp(u) / float(phi.phi(math.exp(u))),
        0.0,
        math.log(x),
        epsabs=QUAD_EPSABS,
        epsrel=QUAD_EPSREL,
        limit=QUAD_LIMIT,
    )
    if error > QUAD_EPSABS * max(1.0, abs(value)):
        logger.debug("H_phi(%g) quadrature error estimate %.3g", x, error)
    return value


def H_phi_inverse(phi: PhiSpec, y: float) -> float:
    """Return x >= 1 with H_phi(x) = y.

    Raises:
        DomainError: If y < 0 or the bracket cannot be grown far enough

    """
    if y < 0:
        raise DomainError(f"H_phi inverse is defined for y >= 0, got {y}")
    if y == 0:
        return 1.0
    if phi.closed_form_H_inverse is not None:
        return float(phi.closed_form_H_inverse(y))
    lo, hi = 1.0, 2.0
    while H_phi(phi, hi) < y:
        lo, hi = hi, hi * 2.0
        if hi > BRACKET_CAP:
            raise DomainError(f"H_phi stays below {y} up to {BRACKET_CAP:g}")
    x = brentq(lambda t: H_phi(phi, t) - y, lo, hi, xtol=1e-300, rtol=4e-16)
    gap = abs(H_phi(phi, x) - y)
    if gap > INVERSE_TOL * max(1.0, y):
        logger.debug("H_phi inverse at y=%g misses by %.3g", y, gap)
    return x


def r_phi(phi: PhiSpec, x: float) -> float:
    """Return phi(H_phi^{-1}(x)), and 0 for negative x."""
    if x < 0:
        return 0.0
    if phi.closed_form_r is not None:
        return float(phi.closed_form_r(x))
    return float(phi.phi(H_phi_inverse(phi, x)))


def c_phi_B(phi: PhiSpec, B: float, x: float) -> float:
    """Return the deflation c(x) = phi(1)/phi(B + 1) x.

    Raises:
        InvalidArgumentError: If B is not positive
        DomainError: If x is negative

    """
    if B <= 0:
        raise InvalidArgumentError(f"B must be positive, got {B}")
    if x < 0:
        raise DomainError(f"c_phi_B is defined for x >= 0, got {x}")
    return float(phi.phi(1.0)) / float(phi.phi(B + 1.0)) * x


@dataclass(frozen=True)
class DriftCertificate:
    """Drift data P^M v <= v - phi(v) + b 1_K consumed by the bounds.

    Attributes:
        v: Lyapunov vector with entries at least 1
        phi: Drift function
        b: Drift constant on levels 0..K
        K: Largest level where b is added
        M: Number of steps in the drift inequality
        B: Constant with B P^M(K; 0) e >= b e, required when K > 0

    """

    v: BlockVector
    phi: PhiSpec
    b: float
    K: int
    M: int = 1
    B: float | None = None
    notes: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        """Validate the certificate on a sample of levels.

        Raises:
            InvalidArgumentError: If a field is out of range or v fails the
                sampled checks

        """
        if not self.b > 0:
            raise InvalidArgumentError(f"b must be positive, got {self.b}")
        if self.K < 0 or self.M < 1:
            raise InvalidArgumentError(
                f"need K >= 0 and M >= 1, got {self.K}, {self.M}"
            )
        if self.B is not None and not self.B > 0:
            raise InvalidArgumentError(f"B must be positive, got {self.B}")
        sample = self.v.values(0, CERTIFICATE_SAMPLE)
        if (sample < 1.0 - 1e-12).any():
            raise InvalidArgumentError("v must be at least 1 everywhere")
        if (np.diff(sample, axis=0) < 0).any():
            raise InvalidArgumentError("v must be block increasing")

    def v1_varpi(self, varpi: np.ndarray) -> float:
        """Return the phase average of v at level 1."""
        return float(np.asarray(varpi) @ self.v.at(1))

    def phi_v(self, n: int) -> np.ndarray:
        """Return phi(v(n, i)) for every phase."""
        return np.asarray(self.phi.phi(self.v.at(n)), dtype=float)


@dataclass(frozen=True, eq=False)
class DriftReport:
    """Per-level slack of a drift inequality."""

    slack: np.ndarray
    worst_slack: float
    worst_level: int
    passed: bool
    tolerance: float = SLACK_TOL

    def to_dict(self) -> dict:
        """Convert the report to a plain dictionary."""
        return {
            "passed": self.passed,
            "worst_slack": self.worst_slack,
            "worst_level": self.worst_level,
            "levels_checked": int(self.slack.shape[0]),
        }


def drift_image(
    kernel: BlockKernel,
    v: BlockVector,
    level_horizon: int,
    M: int = 1,
    tail_bound: TailBound | None = None,
    window: int = DEFAULT_WINDOW,
) -> np.ndarray:
    """Return an upper estimate of P^M v on levels 0..level_horizon.

    For one step, level k sums blocks through level k + window exactly
    and bounds the rest by tail_bound(k, k + window); without tail_bound
    the rest is bounded by the tail mass times v.bound, or is zero when
    the tail mass vanishes. Several steps are computed exactly through
    powers of the northwest corner, which needs finite column support.

    Args:
        kernel: Kernel P
        v: Vector v
        level_horizon: Largest level evaluated
        M: Number of steps
        tail_bound: Certified bound on the sum over levels above L
        window: Levels summed explicitly above k

    Returns:
        Array of shape (level_horizon + 1, d)

    Raises:
        ContractError: If no certified tail estimate is available

    """
    if M > 1:
        support = kernel.column_support
        if support is None:
            raise ContractError(
                "multi-step drift images need a kernel with finite column support"
            )
        top = max(support, level_horizon)
        corner = northwest_corner(kernel, top)
        power = np.linalg.matrix_power(corner, M)
        image = power @ v.values(0, top + 1).reshape(-1)
        return image.reshape(top + 1, kernel.d)[: level_horizon + 1]

    image = np.zeros((level_horizon + 1, kernel.d))
    for k in range(level_horizon + 1):
        last = k + window
        row = kernel.block_row(k, last + 1)
        image[k] = np.einsum("lij,lj->i", row[:-1], v.values(0, last + 1))
        tail = row[-1]
        if tail_bound is not None:
            image[k] += np.asarray(tail_bound(k, last), dtype=float)
        elif not tail.any():
            continue
        elif v.bound is not None:
            image[k] += tail.sum(axis=1) * v.bound
        else:
            raise ContractError(
                f"level {k} has mass beyond level {last} but no tail bound was given"
            )
    return image


def verify_drift(
    kernel: BlockKernel,
    cert: DriftCertificate,
    level_horizon: int,
    tail_bound: TailBound | None = None,
    window: int = DEFAULT_WINDOW,
) -> DriftReport:
    """Check P^M v <= v - phi(v) + b 1_K level by level.

    Raises:
        ContractError: If a tail estimate is missing for an unbounded v

    """
    image = drift_image(kernel, cert.v, level_horizon, cert.M, tail_bound, window)
    return drift_slack(cert, image)


def drift_slack(cert: DriftCertificate, image: np.ndarray) -> DriftReport:
    """Compare an upper estimate of P^M v with v - phi(v) + b 1_K.

    Args:
        cert: Drift certificate
        image: Estimate of P^M v on levels 0..L, shape (L + 1, d)

    Returns:
        Per-level slack, negative where the inequality fails

    """
    level_horizon = image.shape[0] - 1
    v = cert.v.values(0, level_horizon + 1)
    rhs = v - np.asarray(cert.phi.phi(v), dtype=float)
    rhs[: cert.K + 1] += cert.b
    slack = rhs - image
    flat = int(np.argmin(slack))
    worst_level = flat // image.shape[1]
    worst = float(slack.reshape(-1)[flat])
    passed = worst >= -SLACK_TOL
    log = logger.info if passed else logger.warning
    log("drift slack %.6g at level %d (M=%d, K=%d)", worst, worst_level, cert.M, cert.K)
    return DriftReport(slack, worst, worst_level, passed)
