"""Tests for the drift certificate pipeline.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from lcblock_bounds.errors import (
    AssumptionUnverifiedError,
    ContractError,
    HypothesisViolatedError,
    InvalidArgumentError,
)
from lcblock_bounds.gig1.pipeline import (
    PipelineResult,
    check_V_assumption,
    choose_delta0_K0,
    compute_B,
    moment_tail_ratio,
    run_pipeline,
    verify_certificate,
)
from lcblock_bounds.gig1.spec import (
    GIG1Kernel,
    GIG1Spec,
    explicit_gig1_spec,
    modified_kernel,
)
from lcblock_bounds.special_case import (
    SpecialCaseParams,
    build_special_spec,
    special_pipeline,
)
from lcblock_bounds.vfamily import ModeratelyExponentialV, PolynomialV
from tests.conftest import geometric_blocks


def polynomial(epsilon: float, L: int) -> PolynomialV:
    """Return the polynomial family with beta0 = 1.5 fitted to epsilon."""
    return PolynomialV.for_epsilon(1.5, epsilon, L)


@pytest.fixture(scope="module")
def zeta_result() -> PipelineResult:
    """Run the pipeline on the zeta chain with the closed-form margin."""
    return special_pipeline(3.0, 4.0, 1.5, window=200)


@pytest.fixture(scope="module")
def walk_result() -> PipelineResult:
    """Run the pipeline on the walk with geometric downward jumps."""
    spec = explicit_gig1_spec(geometric_blocks(), name="geometric")
    return run_pipeline(spec, polynomial, window=50)


def test_zeta_chain_choices(
    zeta_result: PipelineResult, special_params: SpecialCaseParams
) -> None:
    """Test N, M, kappa and K of the zeta chain."""
    r = zeta_result
    assert (r.N, r.M) == (1, 1)
    assert r.kappa_epsilon.kappa == special_params.kappa
    assert r.delta0 == pytest.approx(0.514783, abs=1e-5)
    assert r.vfam.x0 == pytest.approx(special_params.x0)
    assert r.K0 == 1
    assert 1 <= r.k_choice.K <= special_params.K
    assert r.k_choice.route == "analytic-tail"
    assert r.assumption.route in ("vanishing-tail", "summable-moment")


def test_zeta_chain_B(zeta_result: PipelineResult) -> None:
    """Test B = 2^K b, since P(K; 0) e = 2^(-K) e."""
    r = zeta_result
    assert r.B == pytest.approx(math.ldexp(r.b, r.k_choice.K))
    assert r.certificate.B == r.B


def test_zeta_chain_certificate_holds(zeta_result: PipelineResult) -> None:
    """Test the drift inequality well past K, and its failure with b halved."""
    horizon = zeta_result.k_choice.K + 100
    report = verify_certificate(zeta_result, horizon)
    assert report.passed
    halved = verify_certificate(zeta_result, horizon, b=zeta_result.b / 2)
    assert not halved.passed
    assert halved.worst_level <= zeta_result.k_choice.K


def test_walk_choices(walk_result: PipelineResult) -> None:
    """Test every stage on the one-phase walk."""
    r = walk_result
    assert (r.N, r.M) == (1, 1)
    assert r.kappa_epsilon.kappa == pytest.approx(0.175)
    assert r.kappa_epsilon.epsilon == 0.05
    assert r.assumption.route == "finite-support"
    assert r.delta0 == pytest.approx(1.05**2 - 1.0)
    assert r.k_choice.K == 9
    assert r.k_choice.route == "empty-sum"


def test_walk_B(walk_result: PipelineResult) -> None:
    """Test B = b / P(K; 0) e on the original kernel."""
    spec = explicit_gig1_spec(geometric_blocks(), name="geometric")
    expected = walk_result.b / spec.negative_tail(9)[0, 0]
    assert walk_result.B == pytest.approx(expected)
    assert compute_B(GIG1Kernel(spec), 1, 9, walk_result.b) == pytest.approx(expected)


def test_walk_certificate_holds(walk_result: PipelineResult) -> None:
    """Test the drift inequality of the walk past K."""
    assert verify_certificate(walk_result, 120, window=50).passed
    assert not verify_certificate(walk_result, 120, b=walk_result.b / 2).passed


def test_walk_report(walk_result: PipelineResult) -> None:
    """Test the plain form of a pipeline result."""
    data = walk_result.to_dict()
    assert data["K"] == 9
    assert data["K_route"] == "empty-sum"
    assert data["v_family"]["family"] == "polynomial"
    assert data["assumption"]["sample_certified"] is True
    assert "K beyond the window: empty-sum" in data["notes"]


def test_walk_without_level_zero_mass() -> None:
    """Test that a drift set with no path to level 0 cannot give B."""
    spec = explicit_gig1_spec({1: [[0.3]], -1: [[0.7]]})
    with pytest.raises(HypothesisViolatedError, match="zero entry"):
        run_pipeline(spec, polynomial, window=50)


def test_supplied_pair_needs_slack(geometric_spec: GIG1Spec) -> None:
    """Test that a kappa above the margin is refused."""
    with pytest.raises(ContractError, match="negative slack"):
        run_pipeline(geometric_spec, polynomial, kappa_epsilon=(0.3, 0.05))


def test_moment_tail_ratio_finite_support(geometric_spec: GIG1Spec) -> None:
    """Test the ratio on both sides of the window edge."""
    vfam = PolynomialV.for_epsilon(1.5, 0.05)
    delta0 = 1.05**2 - 1.0
    folded = modified_kernel(geometric_spec, 1)
    ratio = moment_tail_ratio(vfam, folded, 9, delta0)
    expected = 0.3 * vfam.value(10.0) / vfam.derivative(9.0)
    np.testing.assert_allclose(ratio, [expected])
    np.testing.assert_array_equal(moment_tail_ratio(vfam, folded, 10, delta0), [0])


def test_delta0_closed_form() -> None:
    """Test delta0 = (1 + epsilon)^(1/(beta0 - 1)) - 1 for the polynomial family."""
    delta0, K0 = choose_delta0_K0(PolynomialV.for_epsilon(1.5, 0.230766), 0.230766, 1)
    assert delta0 == pytest.approx(0.514783, abs=1e-5)
    assert K0 == 1


def test_delta0_search() -> None:
    """Test that the halving search gives pairs valid above K0."""
    vfam = ModeratelyExponentialV(0.5, 0.5, 16.0)
    delta0, K0 = choose_delta0_K0(vfam, 0.1, 1, k_max=4000)
    k = np.arange(K0 + 1, 4001, dtype=float)
    ahead = vfam.derivative(k + delta0 * np.sqrt(k))
    assert (ahead <= 1.1 * vfam.derivative(k) * (1 + 1e-12)).all()
    assert (vfam.derivative(k - 1) >= 0.9 * vfam.derivative(k) * (1 - 1e-12)).all()


@pytest.mark.parametrize("epsilon, L", [(0.0, 1), (1.0, 1), (0.5, 0)])
def test_delta0_arguments(epsilon: float, L: int) -> None:
    """Test argument validation of the delta0 search."""
    with pytest.raises(InvalidArgumentError):
        choose_delta0_K0(PolynomialV(1.5, 2.5), epsilon, L)


def test_exponential_weight_is_unverified() -> None:
    """Test that a power-law tail cannot carry an exponential weight."""
    folded = modified_kernel(build_special_spec(3.0, 4.0), 1)
    with pytest.raises(AssumptionUnverifiedError, match="neither moment route"):
        check_V_assumption(ModeratelyExponentialV(0.5, 0.5, 16.0), folded)


def test_finite_support_route(geometric_spec: GIG1Spec) -> None:
    """Test that bounded jumps skip the moment routes."""
    report = check_V_assumption(PolynomialV(1.5, 2.5), geometric_spec)
    assert report.route == "finite-support"
    assert all(report.conditions.values())
