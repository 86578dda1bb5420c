"""Machine-readable reports.

SPDX-FileCopyrightText: 2024 Chen Linxuan <me@black-desk.cn>
SPDX-License-Identifier: GPL-3.0-or-later
"""

from __future__ import annotations

import csv
import io
import json
import math
from enum import Enum, auto
from pathlib import Path
from typing import Any

import numpy as np
import toml
import yaml

from lcblock_bounds.errors import InvalidArgumentError

SCHEMA_VERSION = 1


class OutputFormat(Enum):
    """Output format enum."""

    JSON = auto()
    YAML = auto()
    TOML = auto()
    CSV = auto()

    @classmethod
    def from_str(cls, s: str) -> OutputFormat:
        """Create OutputFormat from string.

        Args:
            s: Format string

        Returns:
            OutputFormat enum value

        Raises:
            InvalidArgumentError: If format string is invalid

        """
        try:
            return {
                "json": cls.JSON,
                "yaml": cls.YAML,
                "toml": cls.TOML,
                "csv": cls.CSV,
            }[s.lower()]
        except KeyError as err:
            raise InvalidArgumentError(f"Invalid format: {s}") from err


def plain(value: Any) -> Any:
    """Convert numpy values and non-finite floats into plain Python data."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, np.generic):
        return plain(value.item())
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def make_report(command: str, body: dict) -> dict:
    """Return a report with schema_version and command leading the fields."""
    return {"schema_version": SCHEMA_VERSION, "command": command, **plain(body)}


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def format_rows(rows: list[dict]) -> str:
    """Format a list of flat rows as CSV with a header row."""
    if not rows:
        return ""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    header = list(rows[0])
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(plain(row.get(key))) for key in header])
    return buffer.getvalue()


def format_output(payload: dict, output_format: OutputFormat) -> str:
    """Format a report in the specified format.

    CSV takes the list under the ``rows`` key of the payload.

    Raises:
        InvalidArgumentError: If CSV is requested for a non-tabular report

    """
    data = plain(payload)
    if output_format == OutputFormat.JSON:
        return json.dumps(data, indent=2, ensure_ascii=False)
    elif output_format == OutputFormat.YAML:
        return yaml.dump(data, allow_unicode=True, sort_keys=False)
    elif output_format == OutputFormat.TOML:
        return toml.dumps(data)
    elif output_format == OutputFormat.CSV:
        rows = data.get("rows")
        if not isinstance(rows, list):
            raise InvalidArgumentError("CSV output needs a tabular report")
        return format_rows(rows)

    raise InvalidArgumentError(f"Unsupported format: {output_format}")


def write_output(text: str, path: str | Path | None, stream: Any) -> None:
    """Write text to path when given, otherwise to stream."""
    if not text.endswith("\n"):
        text += "\n"
    if path is None:
        stream.write(text)
        return
    Path(path).write_text(text, encoding="utf-8")
