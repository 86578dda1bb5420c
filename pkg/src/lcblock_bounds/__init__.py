"""lcblock-bounds - certified truncation error bounds for block-monotone chains.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

__version__ = "0.1.0"

import argparse
import logging
import sys

from lcblock_bounds.commands.bound import BoundCommand
from lcblock_bounds.commands.init import InitCommand
from lcblock_bounds.commands.special_case import SpecialCaseCommand
from lcblock_bounds.commands.stationary import StationaryCommand
from lcblock_bounds.commands.sweep import SweepCommand
from lcblock_bounds.commands.truncate import TruncateCommand
from lcblock_bounds.commands.validate import ValidateCommand
from lcblock_bounds.config import get_config
from lcblock_bounds.config.types import LOG_LEVELS
from lcblock_bounds.errors import LCBlockError


def main(argv: list[str] | None = None) -> int:
    """Run the lcblock-bounds command line.

    Returns:
        Exit code: 0 on success, 1 if validation fails, 2 on argument,
        domain or configuration errors, 3 if a tolerance is unreachable

    """
    parser = argparse.ArgumentParser(
        description="Certified truncation error bounds for block-monotone chains"
    )
    parser.add_argument("--config", "-c", help="Configuration file")
    parser.add_argument(
        "--log-level",
        choices=LOG_LEVELS,
        type=str.upper,
        help="Logging level (default: from configuration)",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # Register commands
    commands = [
        InitCommand(),
        SpecialCaseCommand(),
        BoundCommand(),
        TruncateCommand(),
        StationaryCommand(),
        ValidateCommand(),
        SweepCommand(),
    ]

    for command in commands:
        command.add_parser(subparsers)

    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help(sys.stderr)
        return 2

    try:
        config = get_config(args.config)
        logging.basicConfig(
            level=args.log_level or config.log_level,
            format="%(levelname)s %(name)s: %(message)s",
            stream=sys.stderr,
        )
        # Find and execute the command
        for command in commands:
            if command.name == args.command:
                return command.handle(args, config)
    except LCBlockError as e:
        sys.stderr.write(f"Error: {e!s}\n")
        return e.exit_code
    return 2


if __name__ == "__main__":
    sys.exit(main())
