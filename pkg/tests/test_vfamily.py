"""Tests for the Lyapunov function families.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from lcblock_bounds.drift import check_phi_spec
from lcblock_bounds.errors import AssumptionUnverifiedError, InvalidArgumentError
from lcblock_bounds.vfamily import (
    LogarithmicV,
    ModeratelyExponentialV,
    PolynomialV,
    VFamily,
    phi_from_family,
)

FAMILIES = [
    PolynomialV(1.5, 2.5),
    ModeratelyExponentialV(0.5, 0.5, 16.0),
    LogarithmicV(1.0),
]


def test_x0_for_epsilon() -> None:
    """Test the shift that keeps V'(k - 1) >= (1 - epsilon) V'(k)."""
    v = PolynomialV.for_epsilon(1.5, 0.230766)
    assert v.x0 == pytest.approx(2.4493, abs=1e-3)
    k = np.arange(1.0, 200.0)
    assert (v.derivative(k - 1) >= (1 - 0.230766) * v.derivative(k) - 1e-12).all()


def test_x0_scales_with_lag() -> None:
    """Test that the shift is linear in the lag L."""
    one = PolynomialV.for_epsilon(1.5, 0.2)
    three = PolynomialV.for_epsilon(1.5, 0.2, L=3)
    assert three.x0 == pytest.approx(3 * one.x0)


@pytest.mark.parametrize("vfam", FAMILIES, ids=lambda v: v.name)
def test_inverse(vfam: VFamily) -> None:
    """Test V^{-1}(V(x)) = x."""
    for x in (0.0, 1.0, 17.0, 1000.0):
        assert vfam.inverse(float(vfam.value(x))) == pytest.approx(x, abs=1e-6)


@pytest.mark.parametrize("vfam", FAMILIES, ids=lambda v: v.name)
def test_derivatives(vfam: VFamily) -> None:
    """Test V' and V'' against central differences."""
    x, h = 40.0, 1e-4
    slope = (vfam.value(x + h) - vfam.value(x - h)) / (2 * h)
    assert vfam.derivative(x) == pytest.approx(slope, rel=1e-6)
    curve = (vfam.derivative(x + h) - vfam.derivative(x - h)) / (2 * h)
    assert vfam.second_derivative(x) == pytest.approx(curve, rel=1e-5)
    assert vfam.log_value(x) == pytest.approx(math.log(vfam.value(x)))


@pytest.mark.parametrize("vfam", FAMILIES, ids=lambda v: v.name)
def test_phi_from_family(vfam: VFamily) -> None:
    """Test that kappa V' o V^{-1} passes the drift function checks."""
    phi = phi_from_family(vfam, 0.1)
    assert check_phi_spec(phi, samples=60).passed
    t = float(vfam.value(5.0))
    assert float(phi.phi(t)) == pytest.approx(0.1 * float(vfam.derivative(5.0)))


class SquaredExponentialV(VFamily):
    """V(x) = exp((x + 2)^2), too convex for a tangent continuation."""

    name = "squared-exponential"

    def value(self, x: float) -> np.ndarray:
        return np.exp(np.square(np.asarray(x, dtype=float) + 2.0))

    def derivative(self, x: float) -> np.ndarray:
        y = np.asarray(x, dtype=float) + 2.0
        return 2.0 * y * self.value(x)

    def second_derivative(self, x: float) -> np.ndarray:
        y = np.asarray(x, dtype=float) + 2.0
        return (2.0 + 4.0 * y * y) * self.value(x)

    def inverse(self, t: float) -> float:
        return math.sqrt(math.log(t)) - 2.0

    def admissible_for(self, tail_parameter: float) -> bool:
        return False

    def parameters(self) -> dict:
        return {}


def test_vanishing_continuation() -> None:
    """Test that a too convex family cannot give a drift function."""
    with pytest.raises(AssumptionUnverifiedError, match="increase x0"):
        phi_from_family(SquaredExponentialV(), 0.1)
    with pytest.raises(InvalidArgumentError, match="kappa"):
        phi_from_family(PolynomialV(1.5, 2.5), 0.0)


@pytest.mark.parametrize(
    "factory, message",
    [
        (lambda: PolynomialV(1.0, 2.0), "beta0 must exceed 1"),
        (lambda: PolynomialV(1.5, 0.5), "x0 must be at least 1"),
        (lambda: PolynomialV.for_epsilon(1.5, 1.0), "epsilon"),
        (lambda: ModeratelyExponentialV(0.5, 1.0, 16.0), "alpha"),
        (lambda: ModeratelyExponentialV(0.5, 0.5, 1.0), "x0 must be at least"),
        (lambda: LogarithmicV(0.0), "gamma0"),
        (lambda: LogarithmicV(1.0, 2.0), "e\\^2"),
    ],
)
def test_parameter_ranges(factory, message: str) -> None:
    """Test parameter validation of every family."""
    with pytest.raises(InvalidArgumentError, match=message):
        factory()


@pytest.mark.parametrize(
    "vfam, tail, admissible",
    [
        (PolynomialV(1.5, 2.5), 3.0, True),
        (PolynomialV(2.5, 2.5), 3.0, False),
        (ModeratelyExponentialV(0.5, 0.5, 16.0), 1.0, True),
        (LogarithmicV(1.0), 1.5, False),
    ],
)
def test_admissibility(vfam: VFamily, tail: float, admissible: bool) -> None:
    """Test which tail parameters each family fits."""
    assert vfam.admissible_for(tail) is admissible


def test_to_dict() -> None:
    """Test the report form."""
    assert PolynomialV(1.5, 2.5).to_dict() == {
        "family": "polynomial",
        "alpha": 0.0,
        "beta0": 1.5,
        "x0": 2.5,
    }
