"""Self-describing binary matrix format for field dumps and spectrograms.

Layout: a 64-byte header followed by the matrix as little-endian float64,
row major.  Header fields (all little endian):

    bytes  0-7    magic ``MBFDUMP1``
    bytes  8-15   uint64 rows
    bytes 16-23   uint64 cols
    bytes 24-31   float64 row step (e.g. dt in seconds)
    bytes 32-39   float64 column step (e.g. dz in meters)
    bytes 40-47   float64 row origin
    bytes 48-55   float64 column origin
    bytes 56-63   reserved (zeros)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"MBFDUMP1"
_HEADER = struct.Struct("<8sQQdddd8x")
HEADER_SIZE = _HEADER.size  # 64


@dataclass
class MatrixDump:
    data: np.ndarray
    row_step: float
    col_step: float
    row_origin: float = 0.0
    col_origin: float = 0.0


def write_matrix(path, dump: MatrixDump) -> None:
    data = np.ascontiguousarray(dump.data, dtype="<f8")
    if data.ndim != 2:
        raise ValueError("dump expects a 2-D matrix")
    header = _HEADER.pack(
        MAGIC,
        data.shape[0],
        data.shape[1],
        dump.row_step,
        dump.col_step,
        dump.row_origin,
        dump.col_origin,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes())


def read_matrix(path) -> MatrixDump:
    raw = Path(path).read_bytes()
    if len(raw) < HEADER_SIZE:
        raise ValueError(f"{path}: too short for a matrix dump header")
    magic, rows, cols, rstep, cstep, rorig, corig = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    expected = HEADER_SIZE + rows * cols * 8
    if len(raw) != expected:
        raise ValueError(f"{path}: size {len(raw)} != expected {expected}")
    data = np.frombuffer(raw, dtype="<f8", offset=HEADER_SIZE).reshape(rows, cols)
    return MatrixDump(
        data=data.copy(), row_step=rstep, col_step=cstep,
        row_origin=rorig, col_origin=corig,
    )
