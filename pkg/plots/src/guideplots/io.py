"""CSV artifact readers.

Artifacts follow the harness conventions: any number of leading comment
lines starting with '#', then a header row naming all columns, then data
rows.  Readers validate the schema and report the first missing column
by name.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


class SchemaError(Exception):
    """An artifact does not match the expected CSV schema."""


def read_table(path: Path, required: list[str]) -> dict[str, np.ndarray]:
    """Read one artifact into column arrays, validating required columns.

    Numeric columns come back as float arrays, everything else as object
    arrays of strings.
    """
    path = Path(path)
    try:
        lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    except OSError as exc:
        raise SchemaError(f"{path}: unreadable ({exc})") from exc
    if not lines:
        raise SchemaError(f"{path}: empty file")
    rows = list(csv.reader(lines))
    header = rows[0]
    for col in required:
        if col not in header:
            raise SchemaError(f"{path}: missing column '{col}' (found {header})")
    data = rows[1:]
    if not data:
        raise SchemaError(f"{path}: no data rows")
    if any(len(r) != len(header) for r in data):
        raise SchemaError(f"{path}: ragged rows")

    out: dict[str, np.ndarray] = {}
    columns = list(zip(*data))
    for name, values in zip(header, columns):
        try:
            out[name] = np.array([float(v) for v in values])
        except ValueError:
            out[name] = np.array(values, dtype=object)
    return out


def find_artifacts(in_dir: Path, pattern: str) -> list[Path]:
    paths = sorted(Path(in_dir).glob(pattern))
    if not paths:
        raise SchemaError(f"no files matching '{pattern}' under {in_dir}")
    return paths


def scheme_from_name(path: Path, prefix: str) -> str:
    """samples_dng_exact.csv -> dng_exact."""
    return path.stem[len(prefix):]
