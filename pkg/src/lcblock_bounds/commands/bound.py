"""Bound command for lcblock-bounds.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import argparse

from lcblock_bounds.commands.base import Command
from lcblock_bounds.config import RunConfig
from lcblock_bounds.model import ModelBounds


class BoundCommand(Command):
    """Command for evaluating the truncation bound of the configured model."""

    @property
    def name(self) -> str:
        """Get the command name."""
        return "bound"

    @property
    def help(self) -> str:
        """Get the command help text."""
        return "Evaluate the truncation error bound at level n"

    def add_parser(self, subparsers: argparse._SubParsersAction) -> None:
        """Add command parser to subparsers.

        Args:
            subparsers: The subparsers object from ArgumentParser

        """
        parser = subparsers.add_parser(self.name, help=self.help)
        parser.add_argument("n", type=int, help="Truncation level")
        parser.add_argument(
            "--m", type=int, help="Mixing parameter (default: minimize over m)"
        )
        parser.add_argument("--m-max", type=int, help="Largest m scanned")
        parser.add_argument(
            "--tolerance", "-E", type=float, help="Also plan (m0, n0) for this target"
        )
        self.add_output_arguments(parser)

    def handle(self, args: argparse.Namespace, config: RunConfig) -> int:
        """Handle the command.

        Args:
            args: The parsed arguments
            config: The loaded configuration

        """
        config = config.override(m_max=args.m_max, tolerance=args.tolerance)
        model = ModelBounds(config)
        if args.m is None:
            report = model.best_bound(args.n)
        else:
            report = model.bound(args.m, args.n)
        body = {**model.describe(), **report.to_dict()}
        if args.tolerance is not None:
            plan = model.plan(config.tolerance)
            body.update(m0=plan.m0, n0=plan.n0)
        self.emit(args, config, body)
        return 0
