"""Drift certificates for GI/G/1-type kernels, stage by stage.

The stages run in data order: pick N and M so that the modified M-step
increments drift down, pick kappa and epsilon, check the weight V, find
delta0 and K0, then K, and finally b and B. run_pipeline chains them.

Limit conditions cannot be checked by a machine. They are tested on
geometric samples and every such outcome is reported as sample-certified.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import dataclasses
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from lcblock_bounds.blockmatrix import BlockKernel
from lcblock_bounds.drift import (
    DEFAULT_WINDOW,
    DriftCertificate,
    DriftReport,
    PhiSpec,
    TailBound,
    check_phi_spec,
    drift_image,
    drift_slack,
)
from lcblock_bounds.errors import (
    AssumptionUnverifiedError,
    ContractError,
    HypothesisViolatedError,
    InvalidArgumentError,
    SearchExhaustedError,
)
from lcblock_bounds.gig1.convolution import (
    POS_TAIL_TOL,
    ConvolutionKernel,
    KappaEpsilon,
    choose_kappa_epsilon,
    choose_M0,
    convolve_power,
    kappa_epsilon_slack,
)
from lcblock_bounds.gig1.envelope import EXPLICIT_TERMS, weighted_tail
from lcblock_bounds.gig1.spec import GIG1Kernel, GIG1Spec, choose_N, modified_kernel
from lcblock_bounds.truncation import northwest_corner
from lcblock_bounds.vfamily import PolynomialV, VFamily, phi_from_family

logger = logging.getLogger(__name__)

ASSUMPTION_HORIZON = 1e12
ASSUMPTION_DELTA = 0.1
VANISHING_THRESHOLD = 1e-3
CONDENSATION_MARGIN = 0.01
DEFAULT_K_MAX = 100_000
DEFAULT_K_CAP = 100_000
B_FLOOR = 1e-12
REL_TOL = 1e-12
LOG_VALUE_CAP = 600.0

VFactory = Callable[[float, int], VFamily]


@dataclass(frozen=True)
class AssumptionReport:
    """Outcome of the sampled checks on V.

    Attributes:
        route: finite-support, vanishing-tail or summable-moment
        conditions: Sampled outcome of conditions (i)-(v)
        notes: Remarks carried into reports

    """

    route: str
    conditions: dict[str, bool]
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        """Convert the report to a plain dictionary."""
        return {
            "route": self.route,
            "sample_certified": True,
            "conditions": dict(self.conditions),
            "notes": list(self.notes),
        }


def _nonincreasing(values: np.ndarray, rel: float = 1e-9) -> bool:
    return bool((np.diff(values) <= rel * np.abs(values[:-1]) + 1e-300).all())


def _finite_horizon(vfam: VFamily, horizon: float) -> float:
    """Largest sample point where V and V' stay finite."""
    if float(vfam.log_value(horizon)) <= LOG_VALUE_CAP:
        return horizon
    return float(vfam.inverse(math.exp(LOG_VALUE_CAP)))


def _sampled_conditions(vfam: VFamily, horizon: float) -> dict[str, bool]:
    growth_x = np.geomspace(1.0, horizon, 200)
    growth = np.asarray(vfam.log_value(growth_x), dtype=float) / growth_x
    horizon = _finite_horizon(vfam, horizon)
    x = np.geomspace(1.0, horizon, 200)
    first = np.asarray(vfam.derivative(np.concatenate(([0.0], x))), dtype=float)
    second = np.asarray(vfam.second_derivative(x), dtype=float)
    ratio = second / first[1:]
    steps = []
    for delta in (1e-1, 1e-2, 1e-3):
        shifted = vfam.derivative(horizon + delta * horizon ** (1.0 - vfam.alpha))
        steps.append(float(shifted) / float(vfam.derivative(horizon)) - 1.0)
    return {
        "growth_subexponential": bool(
            growth[-1] < 1e-2 and _nonincreasing(growth[20:])
        ),
        "twice_differentiable": bool(np.isfinite(second).all()),
        "derivative_unbounded": bool(first[0] > 0 and (np.diff(first) > 0).all()),
        "curvature_ratio_nonincreasing": _nonincreasing(ratio),
        "shift_ratio_to_one": bool(steps[-1] < 1e-2 and steps[0] >= steps[-1]),
    }


def _vanishing_tail(vfam: VFamily, spec_N: GIG1Spec, horizon: float) -> bool:
    env = spec_N.envelope
    ks = np.geomspace(16.0, _finite_horizon(vfam, horizon), 24)
    values = []
    for k in ks:
        start = math.floor(ASSUMPTION_DELTA * k ** (1.0 - vfam.alpha)) + 1
        tail = weighted_tail(env, vfam, 0.0, start)
        scale = float(vfam.value(k)) / float(vfam.derivative(k))
        values.append(float(np.max(tail)) * scale)
    values = np.asarray(values)
    if not np.isfinite(values).all():
        return False
    small = values[-1] <= VANISHING_THRESHOLD * max(values[0], 1.0)
    return bool(_nonincreasing(values[-5:]) and small)


def _summable_moment(vfam: VFamily, spec_N: GIG1Spec) -> bool:
    env = spec_N.envelope
    ells = np.geomspace(1e3, 1e12, 40)
    doubled = np.asarray(vfam.log_value(2.0 * ells) - vfam.log_value(ells), dtype=float)
    if not (doubled[-1] <= doubled[0] + 1e-9 or _nonincreasing(doubled[-10:])):
        return False
    # Double condensation: sum t(l) converges iff sum 2^i 2^(2^i) t(2^(2^i)) does.
    i = np.arange(3, 9, dtype=float)
    log_ell = np.exp2(i) * math.log(2.0)
    ell = np.exp(np.minimum(log_ell, 700.0))
    log_v = vfam.log_value(ell ** (1.0 / (1.0 - vfam.alpha)))
    log_t = np.asarray(log_v, dtype=float)[:, None] + env.log_bound(ell)
    log_b = (i * math.log(2.0) + log_ell)[:, None] + log_t
    diffs = np.diff(log_b, axis=0)[-3:]
    shrinking = (diffs <= math.log1p(-CONDENSATION_MARGIN)).all()
    return bool(np.isfinite(diffs).all() and shrinking)


def check_V_assumption(
    vfam: VFamily, spec_N: GIG1Spec, M: int = 1, horizon: float = ASSUMPTION_HORIZON
) -> AssumptionReport:
    """Check the conditions on V and the moment condition on samples.

    The moment condition is tried first through a vanishing V-weighted
    tail and then through a summable V-moment with bounded V(2l)/V(l).
    For M > 1 the M-step tail is compared through the one-step envelope,
    which has the same order.

    Raises:
        AssumptionUnverifiedError: If a sampled condition fails or no
            route certifies the moment condition

    """
    conditions = _sampled_conditions(vfam, horizon)
    failed = [name for name, ok in conditions.items() if not ok]
    if failed:
        raise AssumptionUnverifiedError(
            f"{vfam.name} V fails sampled conditions: {', '.join(failed)}"
        )
    notes = []
    if spec_N.upper_support is not None:
        return AssumptionReport("finite-support", conditions, notes)
    if spec_N.envelope is None:
        raise AssumptionUnverifiedError(
            "kernel has unbounded positive jumps but no tail envelope"
        )
    if M > 1:
        notes.append("M-step tail compared through the one-step envelope")
    if not vfam.admissible_for(spec_N.envelope.tail_parameter):
        notes.append(f"{vfam.name} parameters outside the admissible range")
    if _vanishing_tail(vfam, spec_N, horizon):
        route = "vanishing-tail"
    elif _summable_moment(vfam, spec_N):
        route = "summable-moment"
    else:
        raise AssumptionUnverifiedError(
            f"neither moment route certifies {vfam.name} V against the "
            f"{spec_N.envelope.kind} envelope"
        )
    logger.warning("moment condition sample-certified via %s", route)
    return AssumptionReport(route, conditions, notes)


def choose_delta0_K0(
    vfam: VFamily, epsilon: float, L: int, k_max: int = DEFAULT_K_MAX
) -> tuple[float, int]:
    """Find delta0 and K0 for the derivative ratio inequalities.

    The pair satisfies V'(k + delta0 k^(1-alpha)) <= (1+eps) V'(k) and
    V'(k - L) >= (1-eps) V'(k) for every integer k in (K0, k_max]. The
    polynomial family has the closed form delta0 = (1+eps)^(1/(beta0-1)) - 1;
    other families halve delta from 1.

    Raises:
        InvalidArgumentError: If epsilon is not in (0, 1) or L < 1
        SearchExhaustedError: If no pair is stable below k_max / 2

    """
    if not 0 < epsilon < 1:
        raise InvalidArgumentError(f"epsilon must be in (0, 1), got {epsilon}")
    if L < 1:
        raise InvalidArgumentError(f"L must be at least 1, got {L}")
    if isinstance(vfam, PolynomialV):
        trials = [(1.0 + epsilon) ** (1.0 / (vfam.beta0 - 1.0)) - 1.0]
    else:
        trials = [2.0**-j for j in range(31)]
    k = np.arange(L, k_max + 1, dtype=float)
    base = np.asarray(vfam.derivative(k), dtype=float)
    back = np.asarray(vfam.derivative(k - L), dtype=float)
    lower_ok = back >= (1.0 - epsilon) * base * (1.0 - REL_TOL)
    for delta in trials:
        shifted = k + delta * k ** (1.0 - vfam.alpha)
        ahead = np.asarray(vfam.derivative(shifted), dtype=float)
        ok = lower_ok & (ahead <= (1.0 + epsilon) * base * (1.0 + REL_TOL))
        failing = np.flatnonzero(~ok)
        K0 = L if failing.size == 0 else max(L, int(k[failing[-1]]))
        if K0 <= k_max // 2:
            logger.info("delta0=%.6g, K0=%d", delta, K0)
            return delta, K0
    raise SearchExhaustedError(f"no (delta0, K0) pair is stable below k_max={k_max}")


def _convolution(spec_N: GIG1Spec, M: int) -> ConvolutionKernel:
    if spec_N.upper_support is None:
        raise ContractError("M > 1 needs increments with a finite upper support")
    conv = convolve_power(spec_N, M)
    if conv.neglected_mass.any():
        raise ContractError("M-step increments must be tabulated exactly")
    return conv


def moment_tail_ratio(
    vfam: VFamily,
    spec_N: GIG1Spec,
    k: int,
    delta0: float,
    conv: ConvolutionKernel | None = None,
    explicit: int = EXPLICIT_TERMS,
) -> np.ndarray:
    """Return (1/V'(k)) sum over l > floor(delta0 k^(1-alpha)) of V(k+l) A^{*M}(l) e."""
    start = math.floor(delta0 * k ** (1.0 - vfam.alpha)) + 1
    if conv is not None:
        ell = np.arange(start, conv.upper + 1)
        if ell.size == 0:
            return np.zeros(spec_N.d)
        rows = np.stack([conv.block(int(j)).sum(axis=1) for j in ell])
        weights = np.asarray(vfam.value(k + ell), dtype=float)
        total = (weights[:, None] * rows).sum(axis=0)
        return total / float(vfam.derivative(k))
    stop = start + explicit
    upper = spec_N.upper_support
    if upper is not None:
        stop = min(stop, upper + 1)
    total = np.zeros(spec_N.d)
    if stop > start:
        rows = spec_N.a_range(start, stop).sum(axis=2)
        ell = np.arange(start, stop, dtype=float)
        weights = np.asarray(vfam.value(k + ell), dtype=float)
        total += (weights[:, None] * rows).sum(axis=0)
    if upper is None:
        if spec_N.envelope is None:
            raise ContractError("a tail envelope is needed for unbounded jumps")
        total += weighted_tail(spec_N.envelope, vfam, float(k), max(stop, start))
    return total / float(vfam.derivative(k))


@dataclass(frozen=True)
class KChoice:
    """The drift-set level K and how the region beyond it was covered."""

    K: int
    route: str
    levels_scanned: int


def _analytic_start(
    vfam: VFamily, spec_N: GIG1Spec, M: int, kappa: float, delta0: float
) -> int | None:
    """Level above which the power-law tail estimate stays below kappa."""
    env = spec_N.envelope
    if M != 1 or not isinstance(vfam, PolynomialV) or env is None:
        return None
    if env.kind != "power-law" or not (env.parameters > vfam.beta0 + 1).all():
        return None
    if not (env.parameters > 2).all():
        return None
    b0 = vfam.beta0
    rho = max(1.0 + 1.0 / delta0, vfam.x0)
    start = 1
    for c, beta in zip(env.coefficients, env.parameters, strict=True):
        C = rho**b0 * delta0 ** (-beta + b0 + 1) * c / (b0 * (beta - b0 - 1))
        start = max(start, math.ceil((C / kappa) ** (1.0 / (beta - 2.0))))
    return start


def choose_K(
    vfam: VFamily,
    spec_N: GIG1Spec,
    M: int,
    kappa: float,
    delta0: float,
    K0: int,
    window: int = DEFAULT_WINDOW,
    K_cap: int = DEFAULT_K_CAP,
) -> KChoice:
    """Find the smallest K >= K0 with the moment tail ratio below kappa.

    Every level in (K, K + window] is checked. Beyond the window the
    ratio is covered by an empty sum for finite supports, by the
    power-law estimate C_i k^(2 - beta_i) for the polynomial family, and
    otherwise only by the window (reported as window-verified).

    Raises:
        SearchExhaustedError: If the ratio exceeds kappa above K_cap

    """
    if window < 1:
        raise InvalidArgumentError(f"window must be positive, got {window}")
    conv = _convolution(spec_N, M) if M > 1 else None
    analytic = _analytic_start(vfam, spec_N, M, kappa, delta0)
    last_fail = K0
    k = K0 + 1
    scanned = 0
    while k <= last_fail + window or (analytic is not None and k < analytic):
        ratio = moment_tail_ratio(vfam, spec_N, k, delta0, conv)
        scanned += 1
        if (ratio > kappa).any():
            last_fail = k
            if last_fail > K_cap:
                raise SearchExhaustedError(
                    f"moment tail ratio still exceeds kappa at level {k}"
                )
        k += 1
    K = last_fail
    edge = K + window + 1
    reach = conv.upper if conv is not None else spec_N.upper_support
    if reach is not None and math.floor(delta0 * edge ** (1.0 - vfam.alpha)) >= reach:
        route = "empty-sum"
    elif analytic is not None:
        route = "analytic-tail"
    else:
        route = "window-verified"
        logger.warning("K=%d verified on a window of %d levels only", K, window)
    logger.info("choose_K: K=%d (%s)", K, route)
    return KChoice(K, route, scanned)


def gig1_tail_bound(spec_N: GIG1Spec, vfam: VFamily) -> TailBound:
    """Return a certified bound on the sum over l > last of P(k; l) V(l) e."""
    d = spec_N.d

    def bound(k: int, last: int) -> np.ndarray:
        if k == 0:
            if not spec_N.boundary_tail(last + 1).any():
                return np.zeros(d)
            if spec_N.boundary_envelope is None:
                raise ContractError(
                    "boundary row has an unbounded tail but no envelope"
                )
            return weighted_tail(spec_N.boundary_envelope, vfam, 0.0, last + 1)
        start = last - k + 1
        if spec_N.upper_support is not None and start > spec_N.upper_support:
            return np.zeros(d)
        if spec_N.envelope is None:
            raise ContractError("kernel has an unbounded tail but no envelope")
        return weighted_tail(spec_N.envelope, vfam, float(k), start)

    return bound


def _multi_step_image(kernel: GIG1Kernel, vfam: VFamily, M: int, K: int) -> np.ndarray:
    spec = kernel.spec
    if spec.upper_support is None:
        raise ContractError("M > 1 needs increments with a finite upper support")
    top = K + M * max(spec.upper_support, 0)
    corner = northwest_corner(kernel, top)
    v = np.repeat(np.asarray(vfam.value(np.arange(top + 1.0)), dtype=float), spec.d)
    image = np.linalg.matrix_power(corner, M) @ v
    return image.reshape(top + 1, spec.d)[: K + 1]


def compute_b(
    vfam: VFamily,
    spec_N: GIG1Spec,
    M: int,
    kappa: float,
    K: int,
    phi: PhiSpec,
    window: int = DEFAULT_WINDOW,
) -> float:
    """Return the largest excess of P_N^M v - v + phi(v) on levels 0..K.

    The result is floored at 1e-12 so that it stays positive.

    Raises:
        ContractError: If a certified tail bound is not available

    """
    kernel = GIG1Kernel(spec_N)
    if M == 1:
        v = vfam.to_block_vector(spec_N.d)
        image = drift_image(kernel, v, K, 1, gig1_tail_bound(spec_N, vfam), window)
    else:
        image = _multi_step_image(kernel, vfam, M, K)
    level_values = np.asarray(vfam.value(np.arange(K + 1.0)), dtype=float)
    values = np.repeat(level_values[:, None], spec_N.d, axis=1)
    excess = image - values + np.asarray(phi.phi(values), dtype=float)
    b = max(float(excess.max()), B_FLOOR)
    logger.info("b=%.6g over levels 0..%d", b, K)
    return b


def compute_B(kernel: BlockKernel, M: int, K: int, b: float) -> float:
    """Return B = b / min_i [P^M(K; 0) e]_i.

    For M > 1 the block is bounded below through the northwest corner on
    levels 0..K + 4M, which can only raise B.

    Raises:
        HypothesisViolatedError: If some row of P^M(K; 0) sums to zero

    """
    d = kernel.d
    if M == 1:
        rows = kernel.block(K, 0).sum(axis=1)
    else:
        corner = np.linalg.matrix_power(northwest_corner(kernel, K + 4 * M), M)
        rows = corner[K * d : (K + 1) * d, :d].sum(axis=1)
    if not (rows > 0).all():
        raise HypothesisViolatedError(
            f"P^{M}(K; 0) e has a zero entry at K={K}; B cannot be formed"
        )
    return b / float(rows.min())


def assemble_certificate(
    vfam: VFamily,
    kappa: float,
    b: float,
    K: int,
    M: int,
    d: int,
    B: float | None = None,
    notes: list[str] | None = None,
) -> DriftCertificate:
    """Build the certificate with v(k, i) = V(k) and phi = kappa V' o V^-1.

    Raises:
        AssumptionUnverifiedError: If phi fails its sampled checks

    """
    phi = phi_from_family(vfam, kappa)
    check = check_phi_spec(phi)
    if not check.passed:
        raise AssumptionUnverifiedError(f"drift function fails sampled checks: {check}")
    return DriftCertificate(
        v=vfam.to_block_vector(d), phi=phi, b=b, K=K, M=M, B=B, notes=list(notes or [])
    )


@dataclass(frozen=True, eq=False)
class PipelineResult:
    """Every intermediate choice of run_pipeline and the final certificate."""

    N: int
    M: int
    kappa_epsilon: KappaEpsilon
    vfam: VFamily
    assumption: AssumptionReport
    delta0: float
    K0: int
    k_choice: KChoice
    b: float
    B: float | None
    certificate: DriftCertificate
    spec_N: GIG1Spec

    @property
    def kernel(self) -> GIG1Kernel:
        """Get the assembled modified kernel."""
        return GIG1Kernel(self.spec_N)

    def to_dict(self) -> dict:
        """Convert the result to a plain dictionary."""
        return {
            "N": self.N,
            "M": self.M,
            "kappa": self.kappa_epsilon.kappa,
            "epsilon": self.kappa_epsilon.epsilon,
            "v_family": self.vfam.to_dict(),
            "assumption": self.assumption.to_dict(),
            "delta0": self.delta0,
            "K0": self.K0,
            "K": self.k_choice.K,
            "K_route": self.k_choice.route,
            "b": self.b,
            "B": self.B,
            "notes": list(self.certificate.notes),
        }


def run_pipeline(
    spec: GIG1Spec,
    vfam: VFamily | VFactory,
    *,
    kappa_epsilon: tuple[float, float] | None = None,
    N_max: int = 50,
    M_max: int = 50,
    k_max: int = DEFAULT_K_MAX,
    window: int = DEFAULT_WINDOW,
    K_cap: int = DEFAULT_K_CAP,
    pos_tail_tol: float = POS_TAIL_TOL,
) -> PipelineResult:
    """Run every stage and return the drift certificate of P_N.

    Args:
        spec: Kernel with negative mean drift
        vfam: Weight function, or a factory (epsilon, L) -> VFamily
        kappa_epsilon: Fixed (kappa, epsilon) pair, checked for slack
        N_max: Largest N tried
        M_max: Largest M tried
        k_max: Horizon of the delta0/K0 search
        window: Levels checked explicitly above K
        K_cap: Largest K accepted
        pos_tail_tol: Neglected positive mass in M-step convolutions

    Returns:
        The pipeline result

    Raises:
        ContractError: If a supplied (kappa, epsilon) pair has negative slack

    """
    N = choose_N(spec, N_max)
    spec_N = modified_kernel(spec, N)
    M = choose_M0(spec_N, M_max)
    if kappa_epsilon is None:
        ke = choose_kappa_epsilon(spec_N, M, pos_tail_tol=pos_tail_tol)
    else:
        kappa, epsilon = kappa_epsilon
        slack = kappa_epsilon_slack(spec_N, M, kappa, epsilon, pos_tail_tol)
        if (slack < -REL_TOL * max(1.0, abs(kappa))).any():
            raise ContractError(
                f"(kappa, epsilon)=({kappa:.6g}, {epsilon:.6g}) has negative slack"
            )
        ke = KappaEpsilon(kappa, epsilon, slack)
    L = M * N
    family = vfam if isinstance(vfam, VFamily) else vfam(ke.epsilon, L)
    assumption = check_V_assumption(family, spec_N, M)
    delta0, K0 = choose_delta0_K0(family, ke.epsilon, L, k_max)
    k_choice = choose_K(family, spec_N, M, ke.kappa, delta0, K0, window, K_cap)
    phi = phi_from_family(family, ke.kappa)
    b = compute_b(family, spec_N, M, ke.kappa, k_choice.K, phi, window)
    B = compute_B(GIG1Kernel(spec), M, k_choice.K, b) if k_choice.K > 0 else None
    notes = [*assumption.notes, f"K beyond the window: {k_choice.route}"]
    certificate = assemble_certificate(
        family, ke.kappa, b, k_choice.K, M, spec.d, B, notes
    )
    return PipelineResult(
        N, M, ke, family, assumption, delta0, K0, k_choice, b, B, certificate, spec_N
    )


def verify_certificate(
    result: PipelineResult,
    level_horizon: int,
    b: float | None = None,
    window: int = DEFAULT_WINDOW,
) -> DriftReport:
    """Check the certificate of a pipeline run on levels 0..level_horizon.

    Args:
        result: Pipeline result
        level_horizon: Largest level checked
        b: Replacement drift constant, for probing how tight b is
        window: Levels summed explicitly above each level

    Returns:
        The drift report

    """
    cert = result.certificate
    if b is not None:
        cert = dataclasses.replace(cert, b=b)
    if cert.M == 1:
        tail = gig1_tail_bound(result.spec_N, result.vfam)
        image = drift_image(result.kernel, cert.v, level_horizon, 1, tail, window)
    else:
        image = _multi_step_image(result.kernel, result.vfam, cert.M, level_horizon)
    return drift_slack(cert, image)
