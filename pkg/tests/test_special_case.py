"""Tests for the closed-form constants of the zeta chain.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from lcblock_bounds.bounds import BoundVariant
from lcblock_bounds.errors import DomainError, InvalidArgumentError
from lcblock_bounds.gig1.spec import GIG1Spec, mean_drift_sigma
from lcblock_bounds.special_case import (
    SpecialCaseParams,
    tail_inequality_check,
    bound_special,
    check_parameters,
    closed_form_params,
    plan_tolerance_special,
    sigma_1_closed_form,
    sigma_closed_form,
    zeta,
    zeta_bracket,
)


def test_zeta_at_two() -> None:
    """Test zeta(2) = pi^2 / 6."""
    assert zeta(2.0) == pytest.approx(math.pi**2 / 6, rel=1e-14)


@pytest.mark.parametrize("s", [1.5, 2.0, 3.0, 4.5])
def test_zeta_bracket_encloses(s: float) -> None:
    """Test that the partial-sum bracket contains zeta(s)."""
    lower, upper = zeta_bracket(s, 1000)
    assert lower <= zeta(s) <= upper
    assert upper - lower < 1e-3


@pytest.mark.parametrize("s", [1.0, 0.5, -2.0])
def test_zeta_domain(s: float) -> None:
    """Test that zeta is refused at s <= 1."""
    with pytest.raises(DomainError, match="s > 1"):
        zeta(s)
    with pytest.raises(DomainError):
        zeta_bracket(s, 10)


def test_closed_form_constants(special_params: SpecialCaseParams) -> None:
    """Test the constants for beta = (3, 4) and beta0 = 1.5."""
    p = special_params
    assert p.kappa == pytest.approx(0.0789458, abs=1e-6)
    assert p.epsilon == pytest.approx(0.2307653, abs=1e-5)
    assert p.delta0 == pytest.approx(0.514783, abs=1e-5)
    assert p.x0 == pytest.approx(2.44931, abs=1e-4)
    assert p.rho == pytest.approx(2.94257, abs=1e-4)
    assert p.C1 == pytest.approx(3.9018, abs=1e-3)
    assert p.C2 == pytest.approx(2.806, abs=1e-2)
    assert p.K == 50
    assert p.K_literal == 49
    assert p.K0 == 1
    assert p.B == math.ldexp(p.b, p.K)
    assert p.V1 == pytest.approx((1 + p.x0) ** 1.5)
    assert "K from the ceiling reading" in p.flags


def test_constants_are_consistent(special_params: SpecialCaseParams) -> None:
    """Test the identities linking kappa, epsilon, delta0 and x0."""
    p = special_params
    ratio = zeta(2.0) / zeta(3.0)
    assert (1 + p.epsilon) / 2 * ratio - 1 == pytest.approx(-2 * p.kappa)
    assert (1 + p.delta0) ** (p.beta0 - 1) == pytest.approx(1 + p.epsilon)
    assert (1 - 1 / p.x0) ** (p.beta0 - 1) == pytest.approx(1 - p.epsilon)
    assert p.rho == pytest.approx(max(1 + 1 / p.delta0, p.x0))


def test_sigma_closed_form_matches_kernel(special_spec: GIG1Spec) -> None:
    """Test the closed-form drifts against the assembled kernel."""
    assert sigma_closed_form(3.0, 4.0) == pytest.approx(-0.880235, abs=1e-5)
    assert sigma_1_closed_form(3.0, 4.0) == pytest.approx(-0.380235, abs=1e-5)
    assert mean_drift_sigma(special_spec) == pytest.approx(
        sigma_closed_form(3.0, 4.0), abs=1e-6
    )


def _sampled_pairs(count: int, seed: int) -> list[tuple[float, float]]:
    rng = np.random.default_rng(seed)
    beta1 = rng.uniform(3.0, 8.0, count)
    beta2 = beta1 + rng.uniform(0.1, 4.0, count)
    return list(zip(beta1.tolist(), beta2.tolist(), strict=True))


@pytest.mark.parametrize(("beta1", "beta2"), _sampled_pairs(20, seed=7))
def test_kappa_and_epsilon_ranges(beta1: float, beta2: float) -> None:
    """Test kappa > 1/24 and 1/10 < epsilon < 1/2 over sampled exponents."""
    params = closed_form_params(beta1, beta2, (beta1 - 1) / 2 + 0.5)
    assert params.kappa > 1 / 24
    assert 0.1 < params.epsilon < 0.5
    assert sigma_closed_form(beta1, beta2) < 0


@pytest.mark.parametrize(
    ("betas", "message"),
    [
        ((2.0, 4.0, 1.5), "2 < beta1 < beta2"),
        ((3.0, 3.0, 1.5), "2 < beta1 < beta2"),
        ((3.0, 4.0, 2.0), "1 < beta0 < beta1 - 1"),
        ((3.0, 4.0, 1.0), "1 < beta0 < beta1 - 1"),
        ((3.0, 4.0, 3.0), "1 < beta0 < beta1 - 1"),
    ],
)
def test_check_parameters(betas: tuple[float, float, float], message: str) -> None:
    """Test the exponent constraints."""
    with pytest.raises(InvalidArgumentError, match=message):
        check_parameters(*betas)


def test_bound_special_report(special_params: SpecialCaseParams) -> None:
    """Test the closed-form bound at one point."""
    report = bound_special(special_params, 10, 100)
    assert report.variant is BoundVariant.SPECIAL
    assert report.bound_value == pytest.approx(
        report.term_mixing + report.term_truncation
    )
    p = special_params
    expected = 4 * 10 * p.b / (p.kappa * 1.5 * (100 + p.x0) ** 0.5)
    assert report.term_truncation == pytest.approx(expected)


def test_bound_special_monotone(special_params: SpecialCaseParams) -> None:
    """Test that the bound decreases in n and the mixing term in m."""
    in_n = [bound_special(special_params, 5, n).bound_value for n in (10, 100, 1000)]
    assert in_n == sorted(in_n, reverse=True)
    in_m = [bound_special(special_params, m, 10).term_mixing for m in (1, 10, 100)]
    assert in_m == sorted(in_m, reverse=True)


def test_bound_special_arguments(special_params: SpecialCaseParams) -> None:
    """Test that m and n must be positive."""
    with pytest.raises(InvalidArgumentError, match="must be positive"):
        bound_special(special_params, 0, 10)


def test_plan_reaches_tolerance(special_params: SpecialCaseParams) -> None:
    """Test that the planned (m0, n0) meets each tolerance."""
    plans = []
    for E in (1.0, 0.5, 0.1):
        plan = plan_tolerance_special(special_params, E)
        report = bound_special(special_params, plan.m0, plan.n0)
        assert report.bound_value <= E * (1 + 1e-9)
        plans.append(plan)
    assert [p.m0 for p in plans] == sorted(p.m0 for p in plans)
    assert [p.n0 for p in plans] == sorted(p.n0 for p in plans)


@pytest.mark.parametrize("E", [0.0, 2.0, -1.0])
def test_plan_tolerance_range(special_params: SpecialCaseParams, E: float) -> None:
    """Test that tolerances outside (0, 2) are refused."""
    with pytest.raises(InvalidArgumentError, match=r"\(0, 2\)"):
        plan_tolerance_special(special_params, E)


def test_tail_check_passes_above_K(special_params: SpecialCaseParams) -> None:
    """Test the K-defining inequality on levels above K."""
    K = special_params.K
    report = tail_inequality_check(special_params, K + 1, K + 100)
    assert report.passed
    data = report.to_dict()
    assert data["levels"] == [K + 1, K + 100]
    assert data["worst_slack"] >= 0
    assert (report.quantity <= report.intermediate).all()


def test_tail_check_range(special_params: SpecialCaseParams) -> None:
    """Test that the check starts strictly above K."""
    K = special_params.K
    with pytest.raises(InvalidArgumentError, match="must exceed K"):
        tail_inequality_check(special_params, K, K + 10)
    with pytest.raises(InvalidArgumentError, match="empty level range"):
        tail_inequality_check(special_params, K + 5, K + 1)
