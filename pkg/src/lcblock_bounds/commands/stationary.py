"""Stationary command for lcblock-bounds.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import argparse

from lcblock_bounds.commands.base import Command
from lcblock_bounds.config import RunConfig
from lcblock_bounds.gig1.spec import GIG1Kernel
from lcblock_bounds.solver import (
    level_marginal,
    reference_pi,
    stationary_dense,
    stationary_gth,
    stationary_power,
    total_variation,
)
from lcblock_bounds.truncation import lc_block_augment

SOLVERS = {
    "gth": stationary_gth,
    "dense": stationary_dense,
    "power": stationary_power,
}


class StationaryCommand(Command):
    """Command for solving the stationary vector of a truncation."""

    @property
    def name(self) -> str:
        """Get the command name."""
        return "stationary"

    @property
    def help(self) -> str:
        """Get the command help text."""
        return "Solve the stationary vector of the truncation at level n"

    def add_parser(self, subparsers: argparse._SubParsersAction) -> None:
        """Add command parser to subparsers.

        Args:
            subparsers: The subparsers object from ArgumentParser

        """
        parser = subparsers.add_parser(self.name, help=self.help)
        parser.add_argument("n", type=int, help="Truncation level")
        parser.add_argument(
            "--method",
            choices=sorted(SOLVERS),
            default="gth",
            help="Solver (default: gth)",
        )
        parser.add_argument(
            "--reference",
            action="store_true",
            help="Report the distance to the solution at n_ref",
        )
        parser.add_argument("--n-ref", type=int, help="Reference truncation level")
        self.add_output_arguments(parser)

    def handle(self, args: argparse.Namespace, config: RunConfig) -> int:
        """Handle the command.

        Args:
            args: The parsed arguments
            config: The loaded configuration

        """
        config = config.override(n_ref=args.n_ref)
        kernel = GIG1Kernel(config.build_spec())
        pi = SOLVERS[args.method](lc_block_augment(kernel, args.n))
        body = {
            "n": pi.n,
            "d": pi.d,
            "method": args.method,
            "boundary_mass": pi.boundary_mass(),
            "level_marginal": level_marginal(pi),
        }
        if args.reference:
            ref = reference_pi(kernel, config.n_ref, args.n)
            body["n_ref"] = config.n_ref
            body["empirical_tv"] = total_variation(pi, ref)
        body["rows"] = [
            {"level": k, "phase": i, "probability": float(pi.levels[k, i])}
            for k in range(pi.n + 1)
            for i in range(pi.d)
        ]
        self.emit(args, config, body)
        return 0
