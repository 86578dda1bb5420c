"""GI/G/1-type kernels and their drift certificates.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

from .convolution import (
    ConvolutionKernel,
    KappaEpsilon,
    choose_kappa_epsilon,
    choose_M0,
    convolve_power,
    multi_step_drift,
)
from .envelope import (
    TailEnvelope,
    log_power_envelope,
    power_law_envelope,
    stretched_exponential_envelope,
    weighted_tail,
)
from .pipeline import (
    AssumptionReport,
    KChoice,
    PipelineResult,
    assemble_certificate,
    check_V_assumption,
    choose_delta0_K0,
    choose_K,
    compute_b,
    compute_B,
    run_pipeline,
    verify_certificate,
)
from .spec import (
    GIG1Kernel,
    GIG1Spec,
    choose_N,
    explicit_gig1_spec,
    mean_drift_sigma,
    modified_kernel,
    sigma_N,
    underline_A,
)

__all__ = [
    "AssumptionReport",
    "ConvolutionKernel",
    "GIG1Kernel",
    "GIG1Spec",
    "KChoice",
    "KappaEpsilon",
    "PipelineResult",
    "TailEnvelope",
    "assemble_certificate",
    "check_V_assumption",
    "choose_K",
    "choose_M0",
    "choose_N",
    "choose_delta0_K0",
    "choose_kappa_epsilon",
    "compute_B",
    "compute_b",
    "convolve_power",
    "explicit_gig1_spec",
    "log_power_envelope",
    "mean_drift_sigma",
    "modified_kernel",
    "multi_step_drift",
    "power_law_envelope",
    "run_pipeline",
    "sigma_N",
    "stretched_exponential_envelope",
    "underline_A",
    "verify_certificate",
    "weighted_tail",
]
