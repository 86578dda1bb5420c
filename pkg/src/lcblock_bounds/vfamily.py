"""Lyapunov function families for heavy-tailed GI/G/1-type kernels.

Each family supplies V, V', V'' and V^{-1} together with the tail
exponent alpha that sets the window floor(delta k^(1 - alpha)) in the
moment condition.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from typing import Any

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import brentq

from lcblock_bounds.blockmatrix import BlockVector
from lcblock_bounds.drift import PhiSpec
from lcblock_bounds.errors import AssumptionUnverifiedError, InvalidArgumentError

logger = logging.getLogger(__name__)


class VFamily(ABC):
    """Increasing, convex, log-concave V: [0, inf) -> [1, inf)."""

    name: str = "V"

    @property
    def alpha(self) -> float:
        """Get the tail exponent alpha in [0, 1)."""
        return 0.0

    @abstractmethod
    def value(self, x: ArrayLike) -> Any:
        """Evaluate V."""

    def log_value(self, x: ArrayLike) -> Any:
        """Evaluate log V without forming V."""
        return np.log(self.value(x))

    @abstractmethod
    def derivative(self, x: ArrayLike) -> Any:
        """Evaluate V'."""

    @abstractmethod
    def second_derivative(self, x: ArrayLike) -> Any:
        """Evaluate V''."""

    @abstractmethod
    def inverse(self, t: float) -> float:
        """Return x with V(x) = t; x may be negative below V(0)."""

    @abstractmethod
    def admissible_for(self, tail_parameter: float) -> bool:
        """Whether V fits kernels whose tails have the given parameter."""

    @abstractmethod
    def parameters(self) -> dict:
        """Return the defining parameters."""

    def closed_form_phi(self, kappa: float) -> PhiSpec | None:
        """Return phi = kappa V' o V^{-1} in closed form, if available."""
        return None

    def to_block_vector(self, d: int) -> BlockVector:
        """Return v(k, i) = V(k) for every phase."""
        return BlockVector.from_level_function(d, self.value)

    def to_dict(self) -> dict:
        """Convert the family to a plain dictionary."""
        return {"family": self.name, "alpha": self.alpha, **self.parameters()}


class PolynomialV(VFamily):
    """V(x) = (x + x0)^beta0 for kernels with tails of order k^(-beta)."""

    name = "polynomial"

    def __init__(self, beta0: float, x0: float) -> None:
        """Initialize the family.

        Args:
            beta0: Exponent, greater than 1
            x0: Shift, at least 1 so that V >= 1

        Raises:
            InvalidArgumentError: If a parameter is out of range

        """
        if not beta0 > 1:
            raise InvalidArgumentError(f"beta0 must exceed 1, got {beta0}")
        if not x0 >= 1:
            raise InvalidArgumentError(f"x0 must be at least 1, got {x0}")
        self.beta0 = float(beta0)
        self.x0 = float(x0)

    @classmethod
    def for_epsilon(cls, beta0: float, epsilon: float, L: int = 1) -> PolynomialV:
        """Pick the smallest x0 with V'(k - L) >= (1 - epsilon) V'(k) for k >= L.

        Raises:
            InvalidArgumentError: If epsilon is not in (0, 1)

        """
        if not 0 < epsilon < 1:
            raise InvalidArgumentError(f"epsilon must be in (0, 1), got {epsilon}")
        if not beta0 > 1:
            raise InvalidArgumentError(f"beta0 must exceed 1, got {beta0}")
        x0 = L / (1.0 - (1.0 - epsilon) ** (1.0 / (beta0 - 1.0)))
        return cls(beta0, x0)

    def value(self, x: ArrayLike) -> Any:
        """Evaluate V."""
        return np.power(np.asarray(x, dtype=float) + self.x0, self.beta0)

    def log_value(self, x: ArrayLike) -> Any:
        """Evaluate log V."""
        return self.beta0 * np.log(np.asarray(x, dtype=float) + self.x0)

    def derivative(self, x: ArrayLike) -> Any:
        """Evaluate V'."""
        y = np.asarray(x, dtype=float) + self.x0
        return self.beta0 * np.power(y, self.beta0 - 1)

    def second_derivative(self, x: ArrayLike) -> Any:
        """Evaluate V''."""
        y = np.asarray(x, dtype=float) + self.x0
        return self.beta0 * (self.beta0 - 1) * np.power(y, self.beta0 - 2)

    def inverse(self, t: float) -> float:
        """Return t^(1/beta0) - x0."""
        return t ** (1.0 / self.beta0) - self.x0

    def admissible_for(self, tail_parameter: float) -> bool:
        """Whether 1 < beta0 < beta - 1."""
        return 1 < self.beta0 < tail_parameter - 1

    def parameters(self) -> dict:
        """Return the defining parameters."""
        return {"beta0": self.beta0, "x0": self.x0}

    def closed_form_phi(self, kappa: float) -> PhiSpec | None:
        """Return phi(t) = kappa beta0 t^(1 - 1/beta0)."""
        return PhiSpec.power(kappa, self.beta0)


class LinearV(VFamily):
    """V(x) = x + 1, the weight of first-moment tail sums."""

    name = "linear"

    def value(self, x: ArrayLike) -> Any:
        """Evaluate V."""
        return np.asarray(x, dtype=float) + 1.0

    def log_value(self, x: ArrayLike) -> Any:
        """Evaluate log V."""
        return np.log1p(np.asarray(x, dtype=float))

    def derivative(self, x: ArrayLike) -> Any:
        """Evaluate V'."""
        return np.ones_like(np.asarray(x, dtype=float))

    def second_derivative(self, x: ArrayLike) -> Any:
        """Evaluate V''."""
        return np.zeros_like(np.asarray(x, dtype=float))

    def inverse(self, t: float) -> float:
        """Return t - 1."""
        return t - 1.0

    def admissible_for(self, tail_parameter: float) -> bool:
        """Whether tails of the given order have a finite first moment."""
        return tail_parameter > 2

    def parameters(self) -> dict:
        """Return the defining parameters."""
        return {}


class ModeratelyExponentialV(VFamily):
    """V(x) = exp(c0 (x + x0)^alpha) for tails of order exp(-c k^alpha)."""

    name = "moderately-exponential"

    def __init__(self, c0: float, alpha: float, x0: float) -> None:
        """Initialize the family.

        Raises:
            InvalidArgumentError: If 0 < alpha < 1, c0 > 0 or
                x0 >= (alpha c0)^(-1/alpha) fails

        """
        if not 0 < alpha < 1:
            raise InvalidArgumentError(f"alpha must be in (0, 1), got {alpha}")
        if not c0 > 0:
            raise InvalidArgumentError(f"c0 must be positive, got {c0}")
        floor = (alpha * c0) ** (-1.0 / alpha)
        if not x0 >= floor:
            raise InvalidArgumentError(f"x0 must be at least {floor:.6g}, got {x0}")
        self.c0 = float(c0)
        self._alpha = float(alpha)
        self.x0 = float(x0)

    @property
    def alpha(self) -> float:
        """Get the tail exponent."""
        return self._alpha

    def log_value(self, x: ArrayLike) -> Any:
        """Evaluate log V = c0 (x + x0)^alpha."""
        return self.c0 * np.power(np.asarray(x, dtype=float) + self.x0, self._alpha)

    def value(self, x: ArrayLike) -> Any:
        """Evaluate V."""
        return np.exp(self.log_value(x))

    def derivative(self, x: ArrayLike) -> Any:
        """Evaluate V'."""
        y = np.asarray(x, dtype=float) + self.x0
        return self._alpha * self.c0 * np.power(y, self._alpha - 1) * self.value(x)

    def second_derivative(self, x: ArrayLike) -> Any:
        """Evaluate V''."""
        y = np.asarray(x, dtype=float) + self.x0
        a, c0 = self._alpha, self.c0
        bracket = a * c0 * np.power(y, a) - (1 - a)
        return a * c0 * np.power(y, a - 2) * self.value(x) * bracket

    def inverse(self, t: float) -> float:
        """Return (log(t)/c0)^(1/alpha) - x0."""
        return (math.log(t) / self.c0) ** (1.0 / self._alpha) - self.x0

    def admissible_for(self, tail_parameter: float) -> bool:
        """Whether 0 < c0 < c for tails exp(-c k^alpha)."""
        return 0 < self.c0 < tail_parameter

    def parameters(self) -> dict:
        """Return the defining parameters."""
        return {"c0": self.c0, "x0": self.x0}


class LogarithmicV(VFamily):
    """V(x) = (x + x0) log(x + x0)^gamma0 for tails k^-2 log(k)^-gamma."""

    name = "logarithmic"

    def __init__(self, gamma0: float, x0: float = math.e**2) -> None:
        """Initialize the family.

        Raises:
            InvalidArgumentError: If gamma0 <= 0 or x0 < e^2

        """
        if not gamma0 > 0:
            raise InvalidArgumentError(f"gamma0 must be positive, got {gamma0}")
        if not x0 >= math.e**2 * (1 - 1e-15):
            raise InvalidArgumentError(f"x0 must be at least e^2, got {x0}")
        self.gamma0 = float(gamma0)
        self.x0 = float(x0)

    def value(self, x: ArrayLike) -> Any:
        """Evaluate V."""
        y = np.asarray(x, dtype=float) + self.x0
        return y * np.power(np.log(y), self.gamma0)

    def log_value(self, x: ArrayLike) -> Any:
        """Evaluate log V."""
        y = np.asarray(x, dtype=float) + self.x0
        return np.log(y) + self.gamma0 * np.log(np.log(y))

    def derivative(self, x: ArrayLike) -> Any:
        """Evaluate V'."""
        log_y = np.log(np.asarray(x, dtype=float) + self.x0)
        return np.power(log_y, self.gamma0 - 1) * (log_y + self.gamma0)

    def second_derivative(self, x: ArrayLike) -> Any:
        """Evaluate V''."""
        y = np.asarray(x, dtype=float) + self.x0
        log_y = np.log(y)
        g = self.gamma0
        return g / y * np.power(log_y, g - 2) * (log_y + g - 1)

    def inverse(self, t: float) -> float:
        """Solve V(x) = t for x by bracketing on y = x + x0."""
        lo = 1.0 + 1e-12
        hi = max(2.0 * self.x0, t)
        while hi * math.log(hi) ** self.gamma0 < t:
            hi *= 2.0
        y = brentq(lambda s: s * math.log(s) ** self.gamma0 - t, lo, hi, rtol=4e-16)
        return y - self.x0

    def admissible_for(self, tail_parameter: float) -> bool:
        """Whether 0 < gamma0 < gamma - 1."""
        return 0 < self.gamma0 < tail_parameter - 1

    def parameters(self) -> dict:
        """Return the defining parameters."""
        return {"gamma0": self.gamma0, "x0": self.x0}


def phi_from_family(vfam: VFamily, kappa: float) -> PhiSpec:
    """Build phi(t) = kappa V'(V^{-1}(t)) on [1, inf).

    The closed form is used when the family has one. Otherwise phi is
    evaluated through V^{-1} for t >= V(0) and continued below V(0) by
    its tangent line, which keeps it concave and nondecreasing.

    Raises:
        InvalidArgumentError: If kappa is not positive
        AssumptionUnverifiedError: If the tangent continuation is not
            positive on [1, V(0)]

    """
    if not kappa > 0:
        raise InvalidArgumentError(f"kappa must be positive, got {kappa}")
    closed = vfam.closed_form_phi(kappa)
    if closed is not None:
        return closed

    t0 = float(vfam.value(0.0))
    phi0 = kappa * float(vfam.derivative(0.0))
    slope0 = kappa * float(vfam.second_derivative(0.0)) / float(vfam.derivative(0.0))
    if phi0 - slope0 * (t0 - 1.0) <= 0:
        raise AssumptionUnverifiedError(
            f"{vfam.name} V gives a drift function that vanishes below V(0); "
            "increase x0"
        )
    inverse = np.vectorize(vfam.inverse, otypes=[float])

    def phi(t: ArrayLike) -> Any:
        t = np.asarray(t, dtype=float)
        above = np.maximum(t, t0)
        analytic = kappa * vfam.derivative(np.maximum(inverse(above), 0.0))
        return np.where(t >= t0, analytic, phi0 + slope0 * (t - t0))

    def phi_prime(t: ArrayLike) -> Any:
        t = np.asarray(t, dtype=float)
        x = np.maximum(inverse(np.maximum(t, t0)), 0.0)
        analytic = kappa * vfam.second_derivative(x) / vfam.derivative(x)
        return np.where(t >= t0, analytic, slope0)

    return PhiSpec(phi=phi, phi_prime=phi_prime, name=f"kappa V' o V^-1 ({vfam.name})")
