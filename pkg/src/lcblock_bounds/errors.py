"""Error types for lcblock-bounds.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations


class LCBlockError(ValueError):
    """Base class for all errors raised by lcblock-bounds.

    Every subclass carries the process exit code the command line uses
    when the error escapes a command.
    """

    exit_code = 2


class InvalidArgumentError(LCBlockError):
    """An argument is outside the accepted range."""


class DomainError(LCBlockError):
    """A function was evaluated outside its domain."""


class ConfigError(LCBlockError):
    """A run configuration is malformed or inconsistent."""


class NotBlockMonotoneError(LCBlockError):
    """A kernel that must be block monotone is not."""


class ReducibilityError(LCBlockError):
    """A phase matrix that must be irreducible is reducible."""


class AmbiguityError(LCBlockError):
    """A finite chain has more than one closed class.

    Attributes:
        states: One state from each of two distinct closed classes

    """

    def __init__(self, message: str, states: tuple[int, int]) -> None:
        super().__init__(message)
        self.states = states


class SearchExhaustedError(LCBlockError):
    """A parameter search hit its cap without success.

    Attributes:
        trajectory: Values inspected during the search, for diagnosis

    """

    def __init__(self, message: str, trajectory: list | None = None) -> None:
        super().__init__(message)
        self.trajectory = trajectory or []


class ToleranceUnreachableError(LCBlockError):
    """No truncation level within the cap meets the tolerance.

    Attributes:
        residual: Smallest achieved excess over the target

    """

    exit_code = 3

    def __init__(self, message: str, residual: float) -> None:
        super().__init__(message)
        self.residual = residual


class AssumptionUnverifiedError(LCBlockError):
    """A Lyapunov function could not be certified for the kernel."""


class ContractError(LCBlockError):
    """A caller broke the documented contract of an operation."""


class HypothesisViolatedError(LCBlockError):
    """A hypothesis required by a bound does not hold."""


class ResourceError(LCBlockError):
    """A computation would exceed its memory cap."""
