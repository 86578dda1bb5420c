"""Base command class for lcblock-bounds.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import argparse
import sys
from abc import ABC, abstractmethod

from lcblock_bounds.config import RunConfig
from lcblock_bounds.report import (
    OutputFormat,
    format_output,
    make_report,
    write_output,
)

OUTPUT_CHOICES = ["json", "csv", "yaml", "toml"]


class Command(ABC):
    """Base class for all commands."""

    default_format: str | None = None

    @property
    @abstractmethod
    def name(self) -> str:
        """Get the command name."""
        pass

    @property
    @abstractmethod
    def help(self) -> str:
        """Get the command help text."""
        pass

    @abstractmethod
    def add_parser(self, subparsers: argparse._SubParsersAction) -> None:
        """Add command parser to subparsers.

        Args:
            subparsers: The subparsers object from ArgumentParser

        """
        pass

    @abstractmethod
    def handle(self, args: argparse.Namespace, config: RunConfig) -> int:
        """Handle the command.

        Args:
            args: The parsed arguments
            config: The loaded configuration

        Returns:
            Process exit code

        """
        pass

    def add_output_arguments(self, parser: argparse.ArgumentParser) -> None:
        """Add the report flags shared by every reporting command."""
        parser.add_argument(
            "--output",
            "-o",
            choices=OUTPUT_CHOICES,
            help="Output format (default: from configuration)",
        )
        parser.add_argument("--out", help="Write the report to this file")
        parser.add_argument(
            "--seed",
            type=int,
            help="Seed recorded in the report for reproducible fixtures",
        )

    def emit(self, args: argparse.Namespace, config: RunConfig, body: dict) -> None:
        """Format a report body and write it to --out or stdout."""
        name = args.output or self.default_format or config.output_format
        if args.seed is not None:
            body = {**body, "seed": args.seed}
        text = format_output(make_report(self.name, body), OutputFormat.from_str(name))
        write_output(text, args.out or config.output_path, sys.stdout)
