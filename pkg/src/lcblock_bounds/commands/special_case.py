"""Special-case command for lcblock-bounds.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import argparse

from lcblock_bounds.commands.base import Command
from lcblock_bounds.config import RunConfig
from lcblock_bounds.model import ModelBounds
from lcblock_bounds.solver import reference_pi, solve_truncation, total_variation
from lcblock_bounds.special_case import bound_special


class SpecialCaseCommand(Command):
    """Closed-form constants and truncation plan of the zeta chain."""

    @property
    def name(self) -> str:
        """Get the command name."""
        return "special-case"

    @property
    def help(self) -> str:
        """Get the command help text."""
        return "Closed-form certificate and (m0, n0) plan of the zeta chain"

    def add_parser(self, subparsers: argparse._SubParsersAction) -> None:
        """Add command parser to subparsers.

        Args:
            subparsers: The subparsers object from ArgumentParser

        """
        parser = subparsers.add_parser(self.name, help=self.help)
        parser.add_argument("--beta1", type=float, help="Tail exponent of phase 0")
        parser.add_argument("--beta2", type=float, help="Tail exponent of phase 1")
        parser.add_argument("--beta0", type=float, help="Exponent of V")
        parser.add_argument("--tolerance", "-E", type=float, help="Target distance")
        parser.add_argument(
            "--empirical-n",
            type=int,
            help="Also compare the n-truncation with the reference solution",
        )
        self.add_output_arguments(parser)

    def handle(self, args: argparse.Namespace, config: RunConfig) -> int:
        """Handle the command.

        Args:
            args: The parsed arguments
            config: The loaded configuration

        """
        config = config.override(
            **{
                "model.kind": "special-case",
                "model.beta1": args.beta1,
                "model.beta2": args.beta2,
                "model.beta0": args.beta0,
                "tolerance": args.tolerance,
            }
        )
        model = ModelBounds(config)
        params = model.params
        plan = model.plan(config.tolerance)
        report = bound_special(params, plan.m0, plan.n0)
        body = {
            "beta1": config.beta1,
            "beta2": config.beta2,
            "beta0": config.beta0,
            "tolerance": config.tolerance,
            **params.to_dict(),
            "m0": plan.m0,
            "n0": plan.n0,
            "bound": report.bound_value,
            "term_mixing": report.term_mixing,
            "term_truncation": report.term_truncation,
        }
        if args.empirical_n is not None:
            n = args.empirical_n
            ref = reference_pi(model.kernel, config.n_ref, n)
            best = model.best_bound(n)
            body["empirical"] = {
                "n": n,
                "n_ref": config.n_ref,
                "m_star": best.m,
                "bound": best.bound_value,
                "empirical_tv": total_variation(solve_truncation(model.kernel, n), ref),
            }
        self.emit(args, config, body)
        return 0
