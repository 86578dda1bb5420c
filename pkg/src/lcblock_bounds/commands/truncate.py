"""Truncate command for lcblock-bounds.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import argparse

from lcblock_bounds.commands.base import Command
from lcblock_bounds.config import RunConfig
from lcblock_bounds.gig1.spec import GIG1Kernel
from lcblock_bounds.truncation import lc_block_augment


class TruncateCommand(Command):
    """Command for writing the augmented truncation of the configured kernel."""

    @property
    def name(self) -> str:
        """Get the command name."""
        return "truncate"

    @property
    def help(self) -> str:
        """Get the command help text."""
        return "Write the last-column-block-augmented truncation at level n"

    def add_parser(self, subparsers: argparse._SubParsersAction) -> None:
        """Add command parser to subparsers.

        Args:
            subparsers: The subparsers object from ArgumentParser

        """
        parser = subparsers.add_parser(self.name, help=self.help)
        parser.add_argument("n", type=int, help="Truncation level")
        self.add_output_arguments(parser)

    def handle(self, args: argparse.Namespace, config: RunConfig) -> int:
        """Handle the command.

        Args:
            args: The parsed arguments
            config: The loaded configuration

        """
        matrix = lc_block_augment(GIG1Kernel(config.build_spec()), args.n)
        rows, cols, values = matrix.nonzero_entries()
        body = {
            "n": matrix.n,
            "d": matrix.d,
            "order": matrix.order,
            "storage": matrix.storage.value,
            "rows": [
                {"row": int(i), "col": int(j), "value": float(v)}
                for i, j, v in zip(rows, cols, values, strict=True)
            ],
        }
        self.emit(args, config, body)
        return 0
