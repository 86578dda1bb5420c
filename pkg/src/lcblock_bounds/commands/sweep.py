"""Sweep command for lcblock-bounds.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import argparse

from lcblock_bounds.commands.base import Command
from lcblock_bounds.commands.validate import add_grid_arguments, grid_overrides
from lcblock_bounds.config import RunConfig
from lcblock_bounds.validation import run_sweep


class SweepCommand(Command):
    """Command for tabulating bound and observed distance over levels."""

    default_format = "csv"

    @property
    def name(self) -> str:
        """Get the command name."""
        return "sweep"

    @property
    def help(self) -> str:
        """Get the command help text."""
        return "Tabulate bound and observed distance for every level of n_grid"

    def add_parser(self, subparsers: argparse._SubParsersAction) -> None:
        """Add command parser to subparsers.

        Args:
            subparsers: The subparsers object from ArgumentParser

        """
        parser = subparsers.add_parser(self.name, help=self.help)
        add_grid_arguments(parser)
        parser.add_argument(
            "--no-timings",
            action="store_true",
            help="Leave out runtime_ms so that repeated runs give identical output",
        )
        self.add_output_arguments(parser)

    def handle(self, args: argparse.Namespace, config: RunConfig) -> int:
        """Handle the command.

        Args:
            args: The parsed arguments
            config: The loaded configuration

        """
        config = config.override(**grid_overrides(args))
        rows = run_sweep(config, timings=not args.no_timings)
        self.emit(args, config, {"n_ref": config.n_ref, "rows": rows})
        return 0
