"""Init command for lcblock-bounds.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import argparse
import sys

from lcblock_bounds.commands.base import Command
from lcblock_bounds.config import RunConfig
from lcblock_bounds.config.init import init_config


class InitCommand(Command):
    """Command for writing the default configuration file."""

    @property
    def name(self) -> str:
        """Get the command name."""
        return "init"

    @property
    def help(self) -> str:
        """Get the command help text."""
        return "Write the default configuration to the user config directory"

    def add_parser(self, subparsers: argparse._SubParsersAction) -> None:
        """Add command parser to subparsers.

        Args:
            subparsers: The subparsers object from ArgumentParser

        """
        parser = subparsers.add_parser(self.name, help=self.help)
        parser.add_argument(
            "--force",
            action="store_true",
            help="Overwrite an existing configuration file",
        )

    def handle(self, args: argparse.Namespace, config: RunConfig) -> int:
        """Handle the command.

        Args:
            args: The parsed arguments
            config: The loaded configuration (unused)

        """
        path = init_config(force=args.force)
        sys.stdout.write(f"{path}\n")
        return 0
