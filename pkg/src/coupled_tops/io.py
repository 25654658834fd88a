"""Readers and writers for the CLI's CSV and JSON artifacts.

CSV files start with ``# key: <json>`` metadata lines, then a header row and
data rows. JSON files hold ``{"metadata": ..., "records": [...]}``. Floats
are written with ``repr`` (shortest round-trip form), NaN as ``nan`` in CSV
and ``null`` in JSON, booleans as ``true``/``false``. Line endings are LF.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np


def _fmt(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        return repr(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    return str(value)


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return None if not math.isfinite(value) else value
    return value


def format_csv(metadata: dict, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    for key in sorted(metadata):
        buf.write(f"# {key}: {json.dumps(_jsonable(metadata[key]), sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def format_json(metadata: dict, records: list) -> str:
    doc = {"metadata": _jsonable(metadata), "records": _jsonable(records)}
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_text(text: str, path: str | Path | None):
    """Write to ``path`` (UTF-8, LF) or return the text when path is None."""
    if path is None or str(path) == "-":
        return text
    Path(path).write_text(text, encoding="utf-8", newline="\n")
    return None


def _parse_cell(cell: str) -> Any:
    if cell == "true":
        return True
    if cell == "false":
        return False
    if cell == "":
        return None
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def parse_csv(text: str) -> tuple[dict, list[str], list[list[Any]]]:
    """Inverse of :func:`format_csv`: (metadata, header, typed rows)."""
    metadata: dict = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# ") and not body:
            key, _, value = line[2:].partition(": ")
            metadata[key] = json.loads(value)
        else:
            body.append(line)
    reader = csv.reader(body)
    header = next(reader)
    rows = [[_parse_cell(c) for c in row] for row in reader]
    return metadata, header, rows


def parse_json(text: str) -> tuple[dict, list]:
    doc = json.loads(text)
    return doc["metadata"], doc["records"]


def read_artifact(path: str | Path):
    """Read either artifact type, dispatching on the file suffix."""
    text = Path(path).read_text(encoding="utf-8")
    if str(path).endswith(".json"):
        return parse_json(text)
    return parse_csv(text)


def format_qgrid(metadata: dict, axis1: np.ndarray, axis2: np.ndarray, values: np.ndarray) -> str:
    """Q matrix as CSV: header row of theta2 values, first column theta1."""
    header = ["theta1\\theta2"] + [_fmt(float(t)) for t in axis2]
    rows = ([float(t)] + [float(v) for v in row] for t, row in zip(axis1, values))
    return format_csv(metadata, header, rows)


def parse_qgrid(text: str) -> tuple[dict, np.ndarray, np.ndarray, np.ndarray]:
    metadata, header, rows = parse_csv(text)
    axis2 = np.array([float(h) for h in header[1:]])
    data = np.array(rows, dtype=float)
    return metadata, data[:, 0], axis2, data[:, 1:]
