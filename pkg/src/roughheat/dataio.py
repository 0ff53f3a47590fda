"""File formats: the binary matrix container and plot-ready CSV tables.

Container layout (little-endian), 16-byte header followed by row-major data:

    bytes 0-3   magic  b"RHB1"
    bytes 4-5   format version (uint16, currently 1)
    bytes 6-7   dtype code (uint16; 0 = float64)
    bytes 8-11  n_rows (uint32)
    bytes 12-15 n_cols (uint32)

CSV files are written with repr-exact float formatting so artifacts are
byte-stable across runs and worker counts.
"""

import struct

import numpy as np

MAGIC = b"RHB1"
VERSION = 1
_DTYPES = {0: np.dtype("<f8")}
_HEADER = struct.Struct("<4sHHII")

__all__ = ["write_matrix", "read_matrix", "write_csv", "write_path_csv", "MAGIC", "VERSION"]


def write_matrix(path, arr):
    """Write a 1-D or 2-D float array to the binary container."""
    arr = np.ascontiguousarray(np.atleast_2d(np.asarray(arr, dtype="<f8")))
    if arr.ndim != 2:
        raise ValueError("container holds 1-D or 2-D arrays only")
    header = _HEADER.pack(MAGIC, VERSION, 0, arr.shape[0], arr.shape[1])
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(arr.tobytes())


def read_matrix(path):
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        magic, version, dcode, nrows, ncols = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        if version != VERSION:
            raise ValueError(f"unsupported container version {version}")
        if dcode not in _DTYPES:
            raise ValueError(f"unknown dtype code {dcode}")
        data = np.frombuffer(fh.read(), dtype=_DTYPES[dcode])
    if data.size != nrows * ncols:
        raise ValueError("container payload truncated")
    return data.reshape(nrows, ncols).copy()


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, columns, rows):
    """Write rows (iterables matching `columns`) as a deterministic CSV table."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def write_path_csv(path, t, values, label="value"):
    """One path as `t,<label>` rows (solver probes use label `u`)."""
    write_csv(path, ["t", label], zip(np.asarray(t, float), np.asarray(values, float)))
