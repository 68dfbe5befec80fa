"""CSV writing with fixed column order and 12-significant-digit floats."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable

import numpy as np


def fmt(value) -> str:
    """CSV cell formatting: floats with 12 significant digits."""
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    return str(value)


def write_csv(path: str | Path, columns, rows: Iterable[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(row[c]) for c in columns])
