"""Validate command for lcblock-bounds.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import argparse

from lcblock_bounds.commands.base import Command
from lcblock_bounds.config import RunConfig
from lcblock_bounds.validation import Validator


def add_grid_arguments(parser: argparse.ArgumentParser) -> None:
    """Add the level grid flags shared by validate and sweep."""
    parser.add_argument("--n-grid", type=int, nargs="*", help="Truncation levels")
    parser.add_argument("--n-ref", type=int, help="Reference truncation level")
    parser.add_argument("--m-max", type=int, help="Largest m scanned")
    parser.add_argument("--jobs", "-j", type=int, help="Worker threads")


def grid_overrides(args: argparse.Namespace) -> dict:
    """Return the configuration overrides of the grid flags."""
    return {
        "n_grid": args.n_grid,
        "n_ref": args.n_ref,
        "m_max": args.m_max,
        "jobs": args.jobs,
    }


class ValidateCommand(Command):
    """Command for running the validation suite."""

    @property
    def name(self) -> str:
        """Get the command name."""
        return "validate"

    @property
    def help(self) -> str:
        """Get the command help text."""
        return "Run the validation suite; exits 1 if any check fails"

    def add_parser(self, subparsers: argparse._SubParsersAction) -> None:
        """Add command parser to subparsers.

        Args:
            subparsers: The subparsers object from ArgumentParser

        """
        parser = subparsers.add_parser(self.name, help=self.help)
        add_grid_arguments(parser)
        parser.add_argument(
            "--b-scale", type=float, help="Scale the drift constant before checking"
        )
        self.add_output_arguments(parser)

    def handle(self, args: argparse.Namespace, config: RunConfig) -> int:
        """Handle the command.

        Args:
            args: The parsed arguments
            config: The loaded configuration

        """
        config = config.override(
            **grid_overrides(args), **{"validate.b_scale": args.b_scale}
        )
        results = Validator(config).run()
        passed = not any(result.failed for result in results)
        body = {
            "passed": passed,
            "checks": [result.to_dict() for result in results],
        }
        self.emit(args, config, body)
        return 0 if passed else 1
