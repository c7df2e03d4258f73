"""Deterministic JSON and CSV emission for reports.

Floats are written with 17 significant digits, keys keep their construction
order, and non-finite values become the strings ``"inf"``, ``"-inf"`` and
``"nan"`` so the output stays valid JSON.
"""

from __future__ import annotations

import csv
import json
import io
import math
from pathlib import Path
from typing import Any

import numpy as np

REPORT_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["tag", "params", "rows", "fit", "verdict"],
    "properties": {
        "tag": {"type": "string"},
        "params": {"type": "object"},
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["k", "left", "right", "ratio"],
                "properties": {
                    "k": {"type": "integer", "minimum": 0},
                    "left": {"$ref": "#/$defs/nonneg"},
                    "right": {"$ref": "#/$defs/nonneg"},
                    "ratio": {"anyOf": [{"$ref": "#/$defs/nonneg"}, {"type": "null"}]},
                    "case": {"type": "integer", "minimum": 0},
                },
            },
        },
        "fit": {
            "type": "object",
            "required": ["C"],
            "anyOf": [{"required": ["L"]}, {"required": ["gamma"]}, {"required": ["h"]},
                      {"required": ["rate"]}],
        },
        "verdict": {"enum": ["bounded-geometric", "violated", "inconclusive"]},
        "notes": {"type": "array", "items": {"type": "string"}},
    },
    "$defs": {
        "nonneg": {"anyOf": [{"type": "number", "minimum": 0}, {"const": "inf"}]},
    },
}


def _scalar(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if math.isnan(x):
            return '"nan"'
        if math.isinf(x):
            return '"inf"' if x > 0 else '"-inf"'
        text = format(x, ".17g")
        # keep floats recognisable as floats
        return text if any(c in text for c in ".en") else text + ".0"
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(payload: Any, indent: int = 2) -> str:
    """Serialize dicts, lists, tuples, arrays and scalars deterministically."""
    out: list[str] = []

    def emit(value: Any, depth: int) -> None:
        pad = " " * (indent * (depth + 1))
        close = " " * (indent * depth)
        if isinstance(value, dict):
            if not value:
                out.append("{}")
                return
            out.append("{\n")
            for i, (key, item) in enumerate(value.items()):
                out.append(f"{pad}{_scalar(str(key))}: ")
                emit(item, depth + 1)
                out.append(",\n" if i < len(value) - 1 else "\n")
            out.append(close + "}")
        elif isinstance(value, (list, tuple, np.ndarray)):
            items = list(value)
            if not items:
                out.append("[]")
                return
            out.append("[\n")
            for i, item in enumerate(items):
                out.append(pad)
                emit(item, depth + 1)
                out.append(",\n" if i < len(items) - 1 else "\n")
            out.append(close + "]")
        else:
            out.append(_scalar(value))

    emit(payload, 0)
    return "".join(out) + "\n"


def rows_csv(rows: list[dict[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    has_case = any("case" in r for r in rows)
    header = ["k", "case", "left", "right", "ratio"] if has_case else ["k", "left", "right", "ratio"]
    writer.writerow(header)
    for r in rows:
        cells = []
        for key in header:
            v = r.get(key)
            cells.append("" if v is None else (format(v, ".17g") if isinstance(v, float) else v))
        writer.writerow(cells)
    return buffer.getvalue()


def table_csv(header: list[str], rows) -> str:
    """Plain CSV with floats at 17 significant digits."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    return buffer.getvalue()


def write_table(header: list[str], rows, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(table_csv(header, rows), encoding="utf-8")
    return path


def write_report(report: dict[str, Any], directory: str | Path) -> tuple[Path, Path]:
    """Write ``report.json`` and ``rows.csv``; returns both paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    json_path = directory / "report.json"
    csv_path = directory / "rows.csv"
    json_path.write_text(dumps(report), encoding="utf-8")
    csv_path.write_text(rows_csv(report.get("rows", [])), encoding="utf-8")
    return json_path, csv_path
