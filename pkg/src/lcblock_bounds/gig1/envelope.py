"""Tail envelopes and certified V-weighted tail sums.

An envelope is a per-phase majorant A(l) e <= c_i g_i(l) for l >= 0.
Weighted tails sum c_i g_i(l) V(shift + l) over l >= start: a block of
terms is added explicitly and the rest is bounded by an integral.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from lcblock_bounds.errors import InvalidArgumentError
from lcblock_bounds.vfamily import VFamily

logger = logging.getLogger(__name__)

EXPLICIT_TERMS = 4096
SHAPE_SAMPLES = 400
SHAPE_SPAN = 1e12

LogProfile = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class TailEnvelope:
    """Majorant of the row sums A(l) e for l >= 0.

    Attributes:
        kind: One of power-law, stretched-exponential, log-power
        coefficients: Per-phase constants c_i
        parameters: Per-phase tail parameters (beta_i, c_i or gamma_i)
        log_profiles: Per-phase evaluators of log g_i

    """

    kind: str
    coefficients: np.ndarray
    parameters: np.ndarray
    log_profiles: tuple[LogProfile, ...]

    @property
    def d(self) -> int:
        """Get the number of phases."""
        return len(self.coefficients)

    @property
    def tail_parameter(self) -> float:
        """Get the heaviest per-phase tail parameter."""
        return float(np.min(self.parameters))

    def log_bound(self, ell: np.ndarray) -> np.ndarray:
        """Return log(c_i g_i(l)) as an (L, d) array."""
        x = np.asarray(ell, dtype=float)
        with np.errstate(divide="ignore"):
            logs = np.log(self.coefficients)
        return np.stack(
            [logs[i] + self.log_profiles[i](x) for i in range(self.d)], axis=-1
        )

    def bound(self, ell: np.ndarray) -> np.ndarray:
        """Return c_i g_i(l) as an (L, d) array."""
        return np.exp(self.log_bound(ell))

    def scaled(self, factor: float) -> TailEnvelope:
        """Return the envelope with every coefficient multiplied by factor."""
        return TailEnvelope(
            self.kind, self.coefficients * factor, self.parameters, self.log_profiles
        )


def _validated(coefficients: list[float], parameters: list[float]) -> tuple:
    c = np.asarray(coefficients, dtype=float)
    p = np.asarray(parameters, dtype=float)
    if c.shape != p.shape or c.ndim != 1:
        raise InvalidArgumentError("need one coefficient and parameter per phase")
    if (c < 0).any():
        raise InvalidArgumentError("envelope coefficients must be nonnegative")
    return c, p


def power_law_envelope(
    coefficients: list[float], exponents: list[float]
) -> TailEnvelope:
    """Envelope c_i (l + 1)^(-beta_i)."""
    c, beta = _validated(coefficients, exponents)
    profiles = tuple(
        (lambda x, b=b: -b * np.log1p(x)) for b in beta.tolist()
    )
    return TailEnvelope("power-law", c, beta, profiles)


def stretched_exponential_envelope(
    coefficients: list[float], rates: list[float], alpha: float
) -> TailEnvelope:
    """Envelope c_i exp(-r_i l^alpha)."""
    c, rate = _validated(coefficients, rates)
    if not 0 < alpha < 1:
        raise InvalidArgumentError(f"alpha must be in (0, 1), got {alpha}")
    profiles = tuple(
        (lambda x, r=r: -r * np.power(x, alpha)) for r in rate.tolist()
    )
    return TailEnvelope("stretched-exponential", c, rate, profiles)


def log_power_envelope(
    coefficients: list[float], gammas: list[float]
) -> TailEnvelope:
    """Envelope c_i (l + 1)^(-2) log(l + 2)^(-gamma_i)."""
    c, gamma = _validated(coefficients, gammas)
    profiles = tuple(
        (lambda x, g=g: -2.0 * np.log1p(x) - g * np.log(np.log(x + 2.0)))
        for g in gamma.tolist()
    )
    return TailEnvelope("log-power", c, gamma, profiles)


def _log_terms(
    envelope: TailEnvelope, vfam: VFamily, phase: int, shift: float, x: np.ndarray
) -> np.ndarray:
    return (
        math.log(envelope.coefficients[phase])
        + envelope.log_profiles[phase](x)
        + vfam.log_value(shift + x)
    )


def weighted_tail(
    envelope: TailEnvelope,
    vfam: VFamily,
    shift: float,
    start: int,
    explicit: int = EXPLICIT_TERMS,
) -> np.ndarray:
    """Upper bound on the sum over l >= start of c_i g_i(l) V(shift + l).

    The first ``explicit`` terms are summed directly. For the remainder
    the summand f is checked on samples to be nonincreasing; if it is
    also convex the midpoint bound (integral from a - 1/2) applies,
    otherwise the integral from a - 1. The integral is taken in log
    space and its quadrature error estimate is added. Convergence is
    checked on the same samples through the decay of x f(x) against
    log log x.

    Args:
        envelope: Tail envelope
        vfam: Weight function V
        shift: Offset added to l inside V
        start: First index summed
        explicit: Number of terms summed directly

    Returns:
        Per-phase bounds; a phase whose remainder cannot be certified is
        reported as infinity

    """
    start = max(int(start), 0)
    out = np.zeros(envelope.d)
    ell = np.arange(start, start + explicit, dtype=float)
    a = float(start + explicit)
    grid = a - 2.0 + np.geomspace(1.0, SHAPE_SPAN, SHAPE_SAMPLES)
    loglog = np.log(np.log(grid))
    for i in range(envelope.d):
        if envelope.coefficients[i] == 0:
            continue
        out[i] = np.exp(_log_terms(envelope, vfam, i, shift, ell)).sum()
        log_f = _log_terms(envelope, vfam, i, shift, grid)
        if not (np.diff(log_f) <= 1e-12).all():
            logger.debug("weighted tail of phase %d not monotone past %g", i, a)
            out[i] = math.inf
            continue
        # x f(x) must fall faster than 1/log(x) for the integral to converge.
        decay = np.diff(np.log(grid[-20:]) + log_f[-20:]) / np.diff(loglog[-20:])
        if not (decay <= -1.01).all():
            logger.debug("weighted tail of phase %d does not converge", i)
            out[i] = math.inf
            continue
        f = np.exp(log_f)
        slopes = np.diff(f) / np.diff(grid)
        convex = bool((np.diff(slopes) >= -1e-15 * np.abs(slopes[:-1])).all())
        lower = a - 0.5 if convex else a - 1.0

        def integrand(u: float, i: int = i) -> float:
            x = np.array([math.exp(u)])
            return math.exp(u + float(_log_terms(envelope, vfam, i, shift, x)[0]))

        value, error = quad(integrand, math.log(lower), math.inf, limit=500)
        if not (math.isfinite(value) and math.isfinite(error)) or error > value:
            logger.debug("weighted tail integral of phase %d unreliable (%g)", i, error)
            out[i] = math.inf
            continue
        out[i] += value + error
    return out
