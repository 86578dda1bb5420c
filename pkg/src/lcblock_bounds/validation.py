"""Validation suite and level sweeps for a configured model.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import logging
import time
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from lcblock_bounds.blockmatrix import (
    block_dominates,
    is_block_monotone,
    vector_block_dominates,
)
from lcblock_bounds.config import RunConfig
from lcblock_bounds.errors import ConfigError, LCBlockError
from lcblock_bounds.gig1.convolution import convolve_power
from lcblock_bounds.gig1.pipeline import moment_tail_ratio, verify_certificate
from lcblock_bounds.gig1.spec import GIG1Kernel, choose_N, modified_kernel
from lcblock_bounds.model import ModelBounds
from lcblock_bounds.solver import (
    ProbabilityVector,
    level_marginal,
    reference_pi,
    solve_truncation,
    total_variation,
)
from lcblock_bounds.special_case import tail_inequality_check

logger = logging.getLogger(__name__)

MARGINAL_TOL = 1e-10
DOMINANCE_TOL = 1e-9


class CheckStatus(Enum):
    """Outcome of one check."""

    PASS = "pass"
    FAIL = "fail"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class CheckResult:
    """One entry of the validation report.

    worst_slack is positive when the check holds with room to spare and
    None for checks without a numeric margin.
    """

    name: str
    status: CheckStatus
    worst_slack: float | None = None
    detail: str = ""

    @property
    def failed(self) -> bool:
        """Whether the check failed."""
        return self.status is CheckStatus.FAIL

    def to_dict(self) -> dict:
        """Convert the result to a plain dictionary."""
        return {
            "name": self.name,
            "status": self.status.value,
            "worst_slack": self.worst_slack,
            "detail": self.detail,
        }


def _status(passed: bool) -> CheckStatus:
    return CheckStatus.PASS if passed else CheckStatus.FAIL


class Validator:
    """Run the checks of a configuration, sharing solves between them."""

    def __init__(self, config: RunConfig, model: ModelBounds | None = None) -> None:
        """Initialize the validator.

        Raises:
            ConfigError: If n_ref is too small for the grid

        """
        config.check_reference()
        self.config = config
        self.model = model or ModelBounds(config)
        self._solutions: dict[int, ProbabilityVector] = {}

    def solution(self, n: int) -> ProbabilityVector:
        """Return the stationary vector of the n-truncation, solving once."""
        if n not in self._solutions:
            self._solutions[n] = solve_truncation(self.model.kernel, n)
        return self._solutions[n]

    def reference(self) -> ProbabilityVector:
        """Return the reference solution at n_ref."""
        c = self.config
        studied = max(c.n_grid) if c.n_grid else None
        if c.n_ref not in self._solutions:
            pi = reference_pi(self.model.kernel, c.n_ref, studied)
            self._solutions[c.n_ref] = pi
        return self._solutions[c.n_ref]

    def check_marginal_identity(self) -> CheckResult:
        """Every truncation keeps the phase marginal of the phase matrix."""
        varpi = self.model.kernel.varpi
        errors = [
            float(np.abs(level_marginal(self.solution(n)) - varpi).max())
            for n in self.config.validate.marginal_grid
        ]
        if not errors:
            return CheckResult("marginal_identity", CheckStatus.SKIPPED)
        worst = MARGINAL_TOL - max(errors)
        return CheckResult("marginal_identity", _status(worst >= 0), worst)

    def check_block_order(self) -> CheckResult:
        """P and P_N are block monotone and P is dominated by P_N."""
        horizon = self.config.validate.n_max_dominance
        spec = self.model.spec
        N = choose_N(spec, self.config.pipeline.N_max)
        folded = GIG1Kernel(modified_kernel(spec, N))
        outcomes = {
            "P monotone": is_block_monotone(self.model.kernel, horizon),
            f"P_{N} monotone": is_block_monotone(folded, horizon),
            f"P below P_{N}": block_dominates(self.model.kernel, folded, horizon),
        }
        failing = [name for name, ok in outcomes.items() if not ok]
        return CheckResult(
            "block_order",
            _status(not failing),
            detail=", ".join(failing) or f"levels 0..{horizon}",
        )

    def check_drift(self) -> CheckResult:
        """The certificate holds on K + drift_margin levels."""
        result = self.model.pipeline
        options = self.config.validate
        horizon = result.k_choice.K + options.drift_margin
        report = verify_certificate(
            result,
            horizon,
            b=result.b * options.b_scale,
            window=self.config.pipeline.window,
        )
        return CheckResult(
            "drift",
            _status(report.passed),
            report.worst_slack,
            f"levels 0..{horizon}, worst at {report.worst_level}",
        )

    def check_tail_inequality(self) -> CheckResult:
        """The moment tail ratio stays below kappa just above K."""
        span = self.config.validate.tail_check_span
        params = self.model.params
        if params is not None:
            report = tail_inequality_check(params, params.K + 1, params.K + span)
            data = report.to_dict()
            return CheckResult(
                "tail_inequality", _status(report.passed), data["worst_slack"]
            )
        r = self.model.pipeline
        K, kappa = r.k_choice.K, r.kappa_epsilon.kappa
        conv = None
        if r.M > 1:
            conv = convolve_power(r.spec_N, r.M, self.config.pipeline.pos_tail_tol)
        worst = min(
            kappa
            - float(np.max(moment_tail_ratio(r.vfam, r.spec_N, k, r.delta0, conv)))
            for k in range(K + 1, K + span + 1)
        )
        return CheckResult("tail_inequality", _status(worst >= 0), worst)

    def check_bound_soundness(self) -> CheckResult:
        """The bound covers the observed distance to the reference solution."""
        grid = self.config.n_grid
        if not grid:
            logger.warning("n_grid is empty; skipping the bound sweep")
            return CheckResult("bound_soundness", CheckStatus.SKIPPED)
        ref = self.reference()
        slack = []
        for n in grid:
            report = self.model.best_bound(n)
            at_ref = self.model.bound(report.m, ref.n).bound_value
            allowance = report.bound_value + at_ref
            slack.append(allowance - total_variation(self.solution(n), ref))
        worst = min(slack)
        return CheckResult("bound_soundness", _status(worst >= 0), worst)

    def check_vector_dominance(self) -> CheckResult:
        """Truncated stationary vectors are dominated by the reference."""
        limit = self.config.validate.n_max_dominance
        levels = [n for n in self.config.n_grid if n <= limit]
        if not levels:
            logger.warning("no grid level up to %d; skipping vector dominance", limit)
            return CheckResult("vector_dominance", CheckStatus.SKIPPED)
        ref = self.reference()
        failing = [
            n
            for n in levels
            if not vector_block_dominates(self.solution(n), ref, DOMINANCE_TOL)
        ]
        return CheckResult(
            "vector_dominance",
            _status(not failing),
            detail=", ".join(f"n={n}" for n in failing),
        )

    def checks(self) -> list[Callable[[], CheckResult]]:
        """Return the checks in report order."""
        return [
            self.check_marginal_identity,
            self.check_block_order,
            self.check_drift,
            self.check_tail_inequality,
            self.check_bound_soundness,
            self.check_vector_dominance,
        ]

    def run(self) -> list[CheckResult]:
        """Run every check; a check that raises is reported as failed."""
        results = []
        for check in self.checks():
            name = check.__name__.removeprefix("check_")
            try:
                result = check()
            except (LCBlockError, np.linalg.LinAlgError) as e:
                logger.warning("check %s failed: %s", name, e)
                result = CheckResult(name, CheckStatus.FAIL, detail=str(e))
            results.append(result)
        return results


def run_sweep(
    config: RunConfig, model: ModelBounds | None = None, timings: bool = True
) -> list[dict]:
    """Return one row per grid level, in grid order.

    Args:
        config: Run configuration with the level grid
        model: Bounds of the configured kernel, built from config when None
        timings: Whether rows carry the wall-clock runtime_ms, the only
            field that changes between identical runs

    Raises:
        ConfigError: If n_grid is empty or n_ref is too small

    """
    if not config.n_grid:
        raise ConfigError("n_grid must not be empty for a sweep")
    config.check_reference()
    model = model or ModelBounds(config)
    ref = reference_pi(model.kernel, config.n_ref, max(config.n_grid))

    def row(n: int) -> dict:
        start = time.perf_counter()
        pi = solve_truncation(model.kernel, n)
        report = model.best_bound(n)
        result = {
            "n": n,
            "m_star": report.m,
            "bound": report.bound_value,
            "empirical_tv": total_variation(pi, ref),
            "boundary_mass": pi.boundary_mass(),
        }
        if timings:
            result["runtime_ms"] = (time.perf_counter() - start) * 1000.0
        return result

    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        return list(pool.map(row, config.n_grid))
