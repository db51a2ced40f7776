"""Deterministic log serialization.

Floats are written with nine significant digits and all row ordering is
fixed by the simulation itself, so two runs with the same seed produce
byte-identical log directories and metrics recomputed from the files match
the originals exactly. Wall-clock timings never go through this module's
log writers; they live in a separate timing file outside the log directory.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return "%.9g" % value
    return str(value)


class CsvLog:
    """Append-only table flushed to disk once at episode end."""

    def __init__(self, columns):
        self.columns = list(columns)
        self.rows: list[list[str]] = []

    def append(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self.rows.append([fmt(v) for v in values])

    def write(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.columns)
            writer.writerows(self.rows)


def parse_cell(raw):
    """Inverse of fmt for a single cell; empty means None."""
    if raw == "" or raw is None:
        return None
    try:
        num = float(raw)
    except ValueError:
        return raw
    if num.is_integer() and "." not in raw and "e" not in raw \
            and "E" not in raw and "inf" not in raw and "nan" not in raw:
        return int(num)
    return num


def read_csv(path) -> list[dict]:
    """Rows as dicts with floats parsed; empty cells come back as None."""
    out: list[dict] = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append({key: parse_cell(raw) for key, raw in row.items()})
    return out


def roundtrip_rows(log: CsvLog) -> list[dict]:
    """Parse a CsvLog's formatted rows exactly as read_csv would after a
    write, so in-run metrics match metrics recomputed from the files."""
    return [{key: parse_cell(raw) for key, raw in zip(log.columns, row)}
            for row in log.rows]


def _round_floats(obj):
    if isinstance(obj, float):
        if math.isinf(obj) or math.isnan(obj):
            return str(obj)
        return float("%.9g" % obj)
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def write_json(path, payload: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_round_floats(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
