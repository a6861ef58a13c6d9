"""Run artifacts: CSV series, JSON summaries and state snapshot directories.

CSV values are written with 17 significant digits so that a file read
back reproduces every double exactly.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .field2d import read_snapshot, write_snapshot
from .kbk import KBKState

STATE_FIELDS = ("zeta", "gamma1", "gamma2")


def format_float(x):
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return repr(x)
    return format(x, ".17g")


def write_csv(path, columns, rows):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_float(v) for v in row])
    return path


def read_csv(path):
    """Return ``(columns, array)`` for a CSV written by :func:`write_csv`."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        columns = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    return columns, np.array(rows, dtype=float).reshape(len(rows), len(columns))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def write_json(path, obj):
    path = Path(path)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_state(directory, state: KBKState, prefix=""):
    """Write the three fields of a state as ``<prefix><name>.sw2d`` files."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, f in zip(STATE_FIELDS, state.fields()):
        p = directory / f"{prefix}{name}.sw2d"
        write_snapshot(p, f)
        paths.append(p)
    return paths


def read_state(directory, prefix="", representation="raw", time=0.0):
    directory = Path(directory)
    fields = []
    for name in STATE_FIELDS:
        p = directory / f"{prefix}{name}.sw2d"
        if not p.exists():
            raise FileNotFoundError(f"missing snapshot {p}")
        fields.append(read_snapshot(p))
    return KBKState(*fields, time=time, representation=representation)
