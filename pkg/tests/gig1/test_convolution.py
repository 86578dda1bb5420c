"""Tests for multi-step increments and the drift margin.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from lcblock_bounds.errors import (
    ContractError,
    InvalidArgumentError,
    ResourceError,
    SearchExhaustedError,
)
from lcblock_bounds.gig1.convolution import (
    ConvolutionKernel,
    choose_kappa_epsilon,
    choose_M0,
    convolve_power,
    kappa_epsilon_slack,
    multi_step_drift,
    neglected_moment_bound,
)
from lcblock_bounds.gig1.spec import GIG1Spec, modified_kernel
from lcblock_bounds.special_case import closed_form_params

A_UP = np.array([[0.6, 0.4], [0.0, 0.0]])
A_DOWN = np.array([[0.0, 0.0], [0.4, 0.6]])


def test_multi_step_drift(two_phase_spec: GIG1Spec) -> None:
    """Test the drift vectors of one, two and three steps."""
    np.testing.assert_allclose(multi_step_drift(two_phase_spec, 1), [1.0, -3.0])
    np.testing.assert_allclose(multi_step_drift(two_phase_spec, 2), [0.4, -4.4])
    np.testing.assert_allclose(multi_step_drift(two_phase_spec, 3), [-0.52, -5.48])
    with pytest.raises(InvalidArgumentError, match="M must be at least 1"):
        multi_step_drift(two_phase_spec, 0)


def test_choose_M0(two_phase_spec: GIG1Spec) -> None:
    """Test the first M whose drift is negative in every phase."""
    assert choose_M0(two_phase_spec, 10) == 3
    with pytest.raises(SearchExhaustedError, match="2-step drift") as info:
        choose_M0(two_phase_spec, 2)
    np.testing.assert_allclose(info.value.trajectory, [[1.0, -3.0], [0.4, -4.4]])


def test_choose_M0_rejects_upward_drift(two_phase_spec: GIG1Spec) -> None:
    """Test that a folded kernel with zero drift is refused."""
    with pytest.raises(InvalidArgumentError, match="must be negative"):
        choose_M0(modified_kernel(two_phase_spec, 1), 10)


def test_convolution_blocks(two_phase_spec: GIG1Spec) -> None:
    """Test the two-step increments block by block."""
    conv = convolve_power(two_phase_spec, 2)
    assert isinstance(conv, ConvolutionKernel)
    assert conv.lower == -6
    np.testing.assert_allclose(conv.block(2), A_UP @ A_UP)
    np.testing.assert_allclose(conv.block(-2), A_UP @ A_DOWN + A_DOWN @ A_UP)
    np.testing.assert_allclose(conv.block(-6), A_DOWN @ A_DOWN)
    np.testing.assert_array_equal(conv.block(0), np.zeros((2, 2)))
    np.testing.assert_array_equal(conv.block(40), np.zeros((2, 2)))
    np.testing.assert_allclose(conv.blocks.sum(axis=(0, 2)), [1.0, 1.0])
    assert not conv.neglected_mass.any()


def test_convolution_moments(two_phase_spec: GIG1Spec) -> None:
    """Test that the tabulated blocks carry the two-step drift."""
    conv = convolve_power(two_phase_spec, 2)
    ks = np.arange(conv.lower, conv.upper + 1)
    drift = np.einsum("k,kij->i", ks, conv.blocks)
    np.testing.assert_allclose(drift, multi_step_drift(two_phase_spec, 2))
    np.testing.assert_allclose(conv.positive_moment(), [1.2, 0.0])


def test_single_step_is_identity(two_phase_spec: GIG1Spec) -> None:
    """Test that M = 1 returns the GIG1Spec itself."""
    assert convolve_power(two_phase_spec, 1) is two_phase_spec


def test_convolution_of_heavy_tails(special_spec: GIG1Spec) -> None:
    """Test the neglected mass bound for unbounded upward jumps."""
    folded = modified_kernel(special_spec, 1)
    conv = convolve_power(folded, 2, pos_tail_tol=1e-4)
    assert conv.lower == -2
    assert (conv.neglected_mass > 0).all()
    assert (conv.neglected_mass <= 1e-4).all()
    total = conv.blocks.sum(axis=(0, 2)) + conv.neglected_mass
    assert (total >= 1.0 - 1e-12).all()
    with pytest.raises(ResourceError, match="levels"):
        convolve_power(folded, 2, pos_tail_tol=1e-14, level_cap=64)
    with pytest.raises(InvalidArgumentError, match="finite negative support"):
        convolve_power(special_spec, 2)


def test_neglected_moment_covers_the_clipped_range(special_spec: GIG1Spec) -> None:
    """Test the first-moment bound against a wider tabulation."""
    folded = modified_kernel(special_spec, 1)
    conv = convolve_power(folded, 2, pos_tail_tol=1e-4)
    wide = convolve_power(folded, 2, pos_tail_tol=1e-6)
    assert wide.upper > 4 * conv.upper

    cut = conv.upper // 2 + 1
    np.testing.assert_allclose(
        conv.neglected_moment, neglected_moment_bound(folded, 2, cut)
    )
    ks = np.arange(conv.upper + 1, wide.upper + 1)
    observed = np.einsum("k,kij->i", ks, wide.blocks[ks - wide.lower])
    assert (observed > 0).all()
    assert (conv.neglected_moment >= observed).all()


def test_neglected_moment_from_envelope(special_spec: GIG1Spec) -> None:
    """Test the envelope bound used when the tail moment is not known."""
    folded = modified_kernel(special_spec, 1)
    exact = convolve_power(folded, 2, pos_tail_tol=1e-4)
    enveloped = convolve_power(
        replace(folded, positive_tail_moment=None), 2, pos_tail_tol=1e-4
    )
    assert np.isfinite(enveloped.neglected_moment).all()
    assert (enveloped.neglected_moment >= exact.neglected_moment).all()

    bare = replace(folded, positive_tail_moment=None, envelope=None)
    assert math.isinf(neglected_moment_bound(bare, 2, 10))


def test_kappa_epsilon_without_margin(two_phase_spec: GIG1Spec) -> None:
    """Test that a one-step drift up in some phase has no kappa."""
    with pytest.raises(ContractError, match="positive kappa"):
        choose_kappa_epsilon(two_phase_spec, 1)


def test_kappa_epsilon_on_walk(geometric_spec: GIG1Spec) -> None:
    """Test the grid search on a one-phase walk."""
    folded = modified_kernel(geometric_spec, 1)
    ke = choose_kappa_epsilon(folded, 1)
    assert ke.epsilon == 0.05
    assert ke.kappa == pytest.approx(0.175)
    assert ke.slack == pytest.approx([0.0], abs=1e-12)


def test_closed_form_pair_is_tight(special_spec: GIG1Spec) -> None:
    """Test that the closed-form kappa leaves no slack in one phase."""
    params = closed_form_params(3.0, 4.0, 1.5)
    folded = modified_kernel(special_spec, 1)
    slack = kappa_epsilon_slack(folded, 1, params.kappa, params.epsilon)
    assert (slack >= -1e-12).all()
    assert slack.min() == pytest.approx(0.0, abs=1e-9)
