"""Delimited table output with fixed number formatting and JSON mirrors."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

UNDEFINED = "undefined"
SIG_DIGITS = 6


def fmt(value) -> str:
    """Render one cell: floats to 6 significant digits, non-finite as
    ``undefined``."""
    if value is None:
        return UNDEFINED
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not math.isfinite(v):
            return UNDEFINED
        out = f"{v:.{SIG_DIGITS}g}"
        return "0" if out == "-0" else out
    return str(value)


def _json_cell(text: str):
    if text == UNDEFINED:
        return UNDEFINED
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def write_table(path, columns: Sequence[str], rows: Iterable[Sequence], mirror: bool = True) -> Path:
    """Write ``path`` as CSV and, with ``mirror``, a ``.json`` list of row
    objects carrying the same formatted values."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cells = [[fmt(v) for v in row] for row in rows]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(cells)
    if mirror:
        records = [{c: _json_cell(v) for c, v in zip(columns, row)} for row in cells]
        with open(path.with_suffix(".json"), "w", encoding="utf-8", newline="\n") as fh:
            json.dump(records, fh, indent=1)
            fh.write("\n")
    return path


def read_table(path) -> list[dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
