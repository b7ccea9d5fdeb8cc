"""Readers for the scan result files.

These parse the documented external formats (results.csv, summary.json and
the 64-byte-header binary matrix dump) independently of the simulator
package, so the figure kit can render outputs from any conforming producer.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    """Input file does not match the documented schema."""


RESULT_COLUMNS = (
    "delay_fs",
    "probe_peak_W",
    "pump_peak_time_fs",
    "probe_peak_time_fs",
    "separation_fs",
    "probe_energy_pJ",
    "peak_inst_freq_THz",
)

_DUMP_MAGIC = b"MBFDUMP1"
_DUMP_HEADER = struct.Struct("<8sQQdddd8x")


def read_results(path) -> dict[str, np.ndarray]:
    """results.csv as column arrays; every documented column must be present."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in RESULT_COLUMNS:
            if col not in header:
                raise SchemaError(f"{path}: missing column {col!r}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    out = {}
    for col in RESULT_COLUMNS:
        try:
            out[col] = np.array([float(r[col]) for r in rows])
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"{path}: non-numeric value in column {col!r}: {exc}")
    return out


def read_summary(path) -> dict:
    """summary.json with per-nominal-delay fits and the coherence fit."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if "per_nominal_delay" not in data:
        raise SchemaError(f"{path}: missing key 'per_nominal_delay'")
    for entry in data["per_nominal_delay"]:
        for key in ("nominal_delay_fs", "visibility", "fitted_period_fs",
                    "intensity_phase_rad", "separation_phase_rad", "lag_cycles"):
            if key not in entry:
                raise SchemaError(f"{path}: per-delay entry missing {key!r}")
    return data


def read_matrix_dump(path):
    """Binary matrix dump -> (data, row_step, col_step, row_origin, col_origin)."""
    raw = Path(path).read_bytes()
    if len(raw) < _DUMP_HEADER.size:
        raise SchemaError(f"{path}: too short for a matrix dump")
    magic, rows, cols, rstep, cstep, rorig, corig = _DUMP_HEADER.unpack_from(raw, 0)
    if magic != _DUMP_MAGIC:
        raise SchemaError(f"{path}: bad magic {magic!r}")
    expected = _DUMP_HEADER.size + rows * cols * 8
    if len(raw) != expected:
        raise SchemaError(f"{path}: truncated matrix dump")
    data = np.frombuffer(raw, dtype="<f8", offset=_DUMP_HEADER.size)
    return data.reshape(rows, cols).copy(), rstep, cstep, rorig, corig
