"""Bounds of the configured model.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import logging
from functools import cached_property

from lcblock_bounds.bounds import (
    BoundReport,
    TolerancePlan,
    bound_gig1,
    minimize_over_m,
    tolerance_plan,
)
from lcblock_bounds.config import RunConfig
from lcblock_bounds.gig1.pipeline import PipelineResult, run_pipeline
from lcblock_bounds.gig1.spec import GIG1Kernel, GIG1Spec
from lcblock_bounds.special_case import (
    SpecialCaseParams,
    bound_special,
    closed_form_params,
    plan_tolerance_special,
    special_pipeline,
)

logger = logging.getLogger(__name__)


class ModelBounds:
    """The kernel of a configuration together with its truncation bounds.

    The special case uses the closed forms; a custom kernel runs the
    certificate pipeline once, on first use.
    """

    def __init__(self, config: RunConfig) -> None:
        """Initialize from a validated configuration."""
        self.config = config
        self.spec: GIG1Spec = config.build_spec()
        self.kernel = GIG1Kernel(self.spec)

    @property
    def is_special(self) -> bool:
        """Whether the closed forms apply."""
        return self.config.model_kind == "special-case"

    @cached_property
    def params(self) -> SpecialCaseParams | None:
        """Get the closed-form constants, or None for a custom kernel."""
        if not self.is_special:
            return None
        c = self.config
        return closed_form_params(c.beta1, c.beta2, c.beta0)

    @cached_property
    def pipeline(self) -> PipelineResult:
        """Get the drift certificate of the modified kernel."""
        c = self.config
        if self.is_special:
            return special_pipeline(c.beta1, c.beta2, c.beta0, c.pipeline.window)
        p = c.pipeline
        logger.info("running the certificate pipeline for %s", self.spec.name)
        return run_pipeline(
            self.spec,
            c.build_vfamily(),
            N_max=p.N_max,
            M_max=p.M_max,
            k_max=p.k_max,
            window=p.window,
            K_cap=p.K_cap,
            pos_tail_tol=p.pos_tail_tol,
        )

    def bound(self, m: int, n: int) -> BoundReport:
        """Return the bound on the distance between the n-truncation and pi."""
        if self.params is not None:
            return bound_special(self.params, m, n)
        r = self.pipeline
        return bound_gig1(
            m,
            n,
            r.M,
            r.b,
            r.B,
            r.k_choice.K,
            float(r.vfam.value(1)),
            r.kappa_epsilon.kappa,
            float(r.vfam.derivative(n)),
            self.spec.d,
            r.certificate.phi,
        )

    def best_bound(self, n: int, m_max: int | None = None) -> BoundReport:
        """Return the bound at level n minimized over m = 1..m_max."""
        m_max = self.config.m_max if m_max is None else m_max
        m_star, _ = minimize_over_m(n, lambda m: self.bound(m, n).bound_value, m_max)
        return self.bound(m_star, n)

    def plan(self, E: float) -> TolerancePlan:
        """Return the smallest (m0, n0) whose bound is at most E."""
        if self.params is not None:
            return plan_tolerance_special(self.params, E)
        return tolerance_plan(
            E,
            lambda m: self.bound(m, 1).term_mixing,
            lambda m, n: self.bound(m, n).term_truncation,
        )

    def describe(self) -> dict:
        """Return the model constants for reports."""
        if self.params is not None:
            return {"model": "special-case", **self.params.to_dict()}
        pipeline = self.pipeline.to_dict()
        return {"model": "gig1-custom", "name": self.spec.name, **pipeline}
