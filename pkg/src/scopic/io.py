"""Sample-file ingestion and report/curve serialization.

Sample files are plain decimal text, one record per line, comma-separated
for joint columns; lines starting with ``#`` are comments. Reports are JSON
with stable field ordering and no timestamps, so identical inputs and seeds
produce identical bytes. Curves are CSV with a one-line header.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import DegenerateInputError, SampleParseError


def _parse_float(token: str) -> float:
    # tolerate typographic minus signs from copy-pasted lab notes
    value = float(token.strip().replace("−", "-"))
    if not math.isfinite(value):
        raise ValueError("non-finite value")
    return value


def ingest_samples(path, layout: str = "single-column"):
    """Read samples from ``path``.

    single-column -> 1-D ndarray; two-column -> (pA, pB) ndarray pair.
    Malformed rows raise SampleParseError naming the line; fewer than two
    records raise DegenerateInputError.
    """
    if layout not in ("single-column", "two-column"):
        raise DegenerateInputError(f"unknown layout {layout!r}")
    want = 1 if layout == "single-column" else 2
    rows: list = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p for p in line.replace(",", " ").split() if p]
            if len(parts) != want:
                raise SampleParseError(
                    f"{path}: line {lineno}: expected {want} column(s), got {len(parts)}",
                    line=lineno,
                )
            try:
                rows.append([_parse_float(p) for p in parts])
            except ValueError:
                raise SampleParseError(
                    f"{path}: line {lineno}: could not parse {line!r}", line=lineno
                ) from None
    if len(rows) < 2:
        raise DegenerateInputError(f"{path}: need at least 2 records, got {len(rows)}")
    arr = np.asarray(rows, dtype=float)
    if layout == "single-column":
        return arr[:, 0]
    return arr[:, 0], arr[:, 1]


def calibration_scale(vacuum_samples) -> float:
    """Rescaling factor mapping detector units to vacuum-variance-1 units."""
    v = np.asarray(vacuum_samples, dtype=float)
    if v.size < 2:
        raise DegenerateInputError("calibration needs >= 2 vacuum records")
    var = float(v.var(ddof=1))
    if var <= 0.0:
        raise DegenerateInputError("calibration record has zero variance")
    return 1.0 / math.sqrt(var)


def write_report_json(report: dict, path) -> None:
    Path(path).write_text(report_json_bytes(report).decode("utf-8"), encoding="utf-8")


def report_json_bytes(report: dict) -> bytes:
    return (json.dumps(report, indent=2, allow_nan=True) + "\n").encode("utf-8")


def write_curve_csv(path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])
