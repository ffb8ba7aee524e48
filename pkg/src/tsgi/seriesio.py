"""Text formats for series and experiment result tables.

SeriesFile: one header line ``# dims=<p> length=<T>`` followed by T
lines of p comma-separated floats.  Floats are written with 17
significant digits, which round-trips float64 exactly.

ResultTable: plain CSV with a header row, one row per experimental
unit; every numeric cell parses back as a decimal float.
"""

from __future__ import annotations

import csv
import re
from pathlib import Path

import numpy as np

from .series import as_series

_HEADER_RE = re.compile(r"^#\s*dims=(\d+)\s+length=(\d+)\s*$")


class SeriesFormatError(ValueError):
    """Raised when a series file does not match the expected format."""


def write_series(path, x: np.ndarray) -> None:
    x = as_series(x)
    t, p = x.shape
    lines = [f"# dims={p} length={t}"]
    for row in x:
        lines.append(",".join(f"{v:.17g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_series(path) -> np.ndarray:
    path = Path(path)
    try:
        raw = path.read_text()
    except OSError as exc:
        raise SeriesFormatError(f"{path}: cannot read ({exc})") from exc
    lines = [ln for ln in raw.splitlines() if ln.strip()]
    if not lines:
        raise SeriesFormatError(f"{path}: empty file")
    m = _HEADER_RE.match(lines[0])
    if not m:
        raise SeriesFormatError(
            f"{path}: first line must be '# dims=<p> length=<T>', got {lines[0]!r}"
        )
    p, t = int(m.group(1)), int(m.group(2))
    body = lines[1:]
    if len(body) != t:
        raise SeriesFormatError(f"{path}: header says length={t} but found {len(body)} rows")
    values = np.empty((t, p))
    for i, line in enumerate(body):
        parts = line.split(",")
        if len(parts) != p:
            raise SeriesFormatError(
                f"{path}: row {i + 1} has {len(parts)} values, header says dims={p}"
            )
        try:
            values[i] = [float(v) for v in parts]
        except ValueError as exc:
            raise SeriesFormatError(f"{path}: row {i + 1}: {exc}") from exc
    if not np.all(np.isfinite(values)):
        raise SeriesFormatError(f"{path}: non-finite values")
    return values


def _format_cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_table(path, rows: list[dict], columns: list[str]) -> None:
    """Write a rectangular CSV; every row must carry every column."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format_cell(row[c]) for c in columns])


def read_table(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows:
        raise SeriesFormatError(f"{path}: empty table")
    return rows[0], rows[1:]
