"""Configuration types.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import copy
import math
from typing import Any, NamedTuple

import numpy as np

from lcblock_bounds.errors import ConfigError, LCBlockError
from lcblock_bounds.gig1.pipeline import VFactory
from lcblock_bounds.gig1.spec import GIG1Spec, explicit_gig1_spec
from lcblock_bounds.special_case import build_special_spec, check_parameters
from lcblock_bounds.vfamily import (
    LogarithmicV,
    ModeratelyExponentialV,
    PolynomialV,
    VFamily,
)

MODEL_KINDS = ("special-case", "gig1-custom")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def merge(base: dict, update: dict) -> dict:
    """Return base updated recursively with update."""
    out = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


class ValidateOptions(NamedTuple):
    """Options of the validation suite."""

    b_scale: float
    drift_margin: int
    tail_check_span: int
    marginal_grid: list[int]
    n_max_dominance: int


class PipelineOptions(NamedTuple):
    """Search limits of the certificate pipeline."""

    N_max: int
    M_max: int
    window: int
    K_cap: int
    k_max: int
    pos_tail_tol: float


def _section(data: dict, name: str) -> dict:
    value = data.get(name) or {}
    if not isinstance(value, dict):
        raise ConfigError(f"'{name}' must be a mapping")
    return value


def _int_list(value: Any, name: str) -> list[int]:
    if value is None:
        return []
    if not isinstance(value, list) or not all(
        isinstance(v, int) and v >= 1 for v in value
    ):
        raise ConfigError(f"'{name}' must be a list of positive integers")
    return list(value)


def _blocks(value: Any, name: str) -> dict[int, np.ndarray] | None:
    if value is None:
        return None
    if not isinstance(value, dict):
        raise ConfigError(f"'{name}' must map level offsets to blocks")
    try:
        return {int(k): np.asarray(v, dtype=float) for k, v in value.items()}
    except (TypeError, ValueError) as err:
        raise ConfigError(f"'{name}' has a malformed block: {err}") from err


class RunConfig:
    """Configuration class."""

    def __init__(self, data: dict) -> None:
        """Initialize configuration.

        Args:
            data: Configuration data dictionary

        Raises:
            ConfigError: If configuration is invalid

        """
        if not isinstance(data, dict):
            raise ConfigError("Configuration must be a dictionary")
        self.data = data

        model = _section(data, "model")
        self.model_kind = model.get("kind", "special-case")
        if self.model_kind not in MODEL_KINDS:
            raise ConfigError(f"model.kind must be one of {MODEL_KINDS}")
        self.beta1 = float(model.get("beta1", 3.0))
        self.beta2 = float(model.get("beta2", 4.0))
        self.beta0 = float(model.get("beta0", 1.5))
        self.a_blocks = _blocks(model.get("a_blocks"), "model.a_blocks")
        self.b_blocks = _blocks(model.get("b_blocks"), "model.b_blocks")
        self.v_family = dict(_section(data, "v_family"))

        self.tolerance = float(data.get("tolerance", 0.5))
        if not 0 < self.tolerance < 2:
            raise ConfigError(f"tolerance must be in (0, 2), got {self.tolerance}")
        self.n_grid = _int_list(data.get("n_grid"), "n_grid")
        self.m_max = int(data.get("m_max", 200))
        self.n_ref = int(data.get("n_ref", 1024))
        self.jobs = int(data.get("jobs", 1))
        if self.m_max < 1 or self.jobs < 1:
            raise ConfigError("m_max and jobs must be positive")

        v = _section(data, "validate")
        self.validate = ValidateOptions(
            b_scale=float(v.get("b_scale", 1.0)),
            drift_margin=int(v.get("drift_margin", 500)),
            tail_check_span=int(v.get("tail_check_span", 200)),
            marginal_grid=_int_list(v.get("marginal_grid"), "validate.marginal_grid"),
            n_max_dominance=int(v.get("n_max_dominance", 64)),
        )
        if not self.validate.b_scale > 0:
            raise ConfigError("validate.b_scale must be positive")

        p = _section(data, "pipeline")
        self.pipeline = PipelineOptions(
            N_max=int(p.get("N_max", 50)),
            M_max=int(p.get("M_max", 50)),
            window=int(p.get("window", 2000)),
            K_cap=int(p.get("K_cap", 100_000)),
            k_max=int(p.get("k_max", 100_000)),
            pos_tail_tol=float(p.get("pos_tail_tol", 1e-14)),
        )

        output = _section(data, "output")
        self.output_format = str(output.get("format", "json"))
        self.output_path = output.get("path")
        self.log_level = str(_section(data, "logging").get("level", "WARNING")).upper()
        if self.log_level not in LOG_LEVELS:
            raise ConfigError(f"logging.level must be one of {LOG_LEVELS}")

        self._check_model()

    def _check_model(self) -> None:
        try:
            if self.model_kind == "special-case":
                check_parameters(self.beta1, self.beta2, self.beta0)
            else:
                if self.a_blocks is None:
                    raise ConfigError("gig1-custom models need model.a_blocks")
                self.build_spec()
                self.build_vfamily()
        except ConfigError:
            raise
        except LCBlockError as err:
            raise ConfigError(f"invalid model: {err}") from err

    def check_reference(self) -> None:
        """Check that n_ref is at least 8 times the largest grid level.

        Raises:
            ConfigError: If the reference level is too small

        """
        if self.n_grid and self.n_ref < 8 * max(self.n_grid):
            raise ConfigError(
                f"n_ref={self.n_ref} must be at least 8 * max(n_grid) = "
                f"{8 * max(self.n_grid)}"
            )

    def override(self, **values: Any) -> RunConfig:
        """Return a new configuration with top-level or dotted keys replaced."""
        update: dict = {}
        for key, value in values.items():
            if value is None:
                continue
            target = update
            *parents, leaf = key.split(".")
            for parent in parents:
                target = target.setdefault(parent, {})
            target[leaf] = value
        return RunConfig(merge(self.data, update))

    def build_spec(self) -> GIG1Spec:
        """Build the kernel the configuration describes."""
        if self.model_kind == "special-case":
            return build_special_spec(self.beta1, self.beta2)
        return explicit_gig1_spec(self.a_blocks, self.b_blocks)

    def build_vfamily(self) -> VFamily | VFactory:
        """Build the weight function, or a factory when x0 is left to the pipeline.

        Raises:
            ConfigError: If the family is unknown or misses a parameter

        """
        params = dict(self.v_family)
        kind = params.pop("kind", "polynomial")
        try:
            if kind == "polynomial":
                beta0 = float(params.get("beta0", self.beta0))
                if "x0" in params:
                    return PolynomialV(beta0, float(params["x0"]))
                return lambda epsilon, L: PolynomialV.for_epsilon(beta0, epsilon, L)
            if kind == "moderately-exponential":
                c0 = float(params["c0"])
                alpha = float(params["alpha"])
                x0 = params.get("x0")
                if x0 is None:
                    valid = 0 < alpha < 1 and c0 > 0
                    x0 = (alpha * c0) ** (-1.0 / alpha) if valid else 1.0
                return ModeratelyExponentialV(c0, alpha, float(x0))
            if kind == "logarithmic":
                gamma0 = float(params["gamma0"])
                return LogarithmicV(gamma0, float(params.get("x0", math.e**2)))
        except KeyError as err:
            raise ConfigError(f"v_family '{kind}' needs parameter {err}") from err
        raise ConfigError(f"unknown v_family kind: {kind}")
