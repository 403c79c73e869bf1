"""Reading and writing data matrices and label files."""

import csv
import math
import struct
from pathlib import Path

import numpy as np

from ncer.errors import InputError

IDX3_MAGIC = 0x00000803
IDX1_MAGIC = 0x00000801


def load_dense_csv(path, header=False):
    """Read a comma-separated matrix, one data point per column.

    ``header=True`` skips the first row. Raises ``InputError`` on an empty
    file, ragged rows, unparsable or non-finite entries.
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        if header:
            next(reader, None)
        for lineno, row in enumerate(reader, start=2 if header else 1):
            if not row or all(not tok.strip() for tok in row):
                continue
            values = []
            for col, tok in enumerate(row, start=1):
                try:
                    v = float(tok)
                except ValueError:
                    raise InputError(f"{path}: row {lineno}, col {col}: cannot parse {tok!r}") from None
                if not math.isfinite(v):
                    raise InputError(f"{path}: row {lineno}, col {col}: non-finite value {tok!r}")
                values.append(v)
            if rows and len(values) != len(rows[0]):
                raise InputError(
                    f"{path}: row {lineno} has {len(values)} fields, expected {len(rows[0])}")
            rows.append(values)
    if not rows:
        raise InputError(f"{path}: no data")
    return np.array(rows, dtype=float)


def save_dense_csv(path, M):
    """Write ``M`` so that ``load_dense_csv`` gives back the same doubles."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w", newline="") as fh:
        for row in M:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def _read_idx(path, magic, ndim):
    data = Path(path).read_bytes()
    head = 4 + 4 * ndim
    if len(data) < head:
        raise InputError(f"{path}: too short for an IDX header")
    found, *dims = struct.unpack(">" + "I" * (1 + ndim), data[:head])
    if found != magic:
        raise InputError(f"{path}: bad magic 0x{found:08x}, expected 0x{magic:08x}")
    size = int(np.prod(dims))
    payload = data[head:head + size]
    if len(payload) < size:
        raise InputError(f"{path}: truncated payload ({len(payload)} of {size} bytes)")
    return dims, np.frombuffer(payload, dtype=np.uint8)


def load_idx_images(path):
    """IDX3 image file as a ``(rows * cols) x n`` float matrix.

    Each image becomes one column, its pixels listed in file order (row by
    row).
    """
    (n, rows, cols), pixels = _read_idx(path, IDX3_MAGIC, 3)
    if n == 0 or rows * cols == 0:
        raise InputError(f"{path}: no images")
    return pixels.reshape(n, rows * cols).T.astype(float)


def _remap(raw):
    """Map labels to 1..r in order of first appearance."""
    codes = {}
    out = np.empty(len(raw), dtype=int)
    for i, v in enumerate(raw):
        out[i] = codes.setdefault(v, len(codes) + 1)
    return out


def load_labels(path):
    """Labels from an IDX1 file or a text file with one integer per line.

    The result uses ``1..r``, numbered in order of first appearance.
    """
    with open(path, "rb") as fh:
        prefix = fh.read(4)
    if len(prefix) == 4 and struct.unpack(">I", prefix)[0] == IDX1_MAGIC:
        _, raw = _read_idx(path, IDX1_MAGIC, 1)
        raw = raw.tolist()
    else:
        raw = []
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                tok = line.strip()
                if not tok:
                    continue
                try:
                    raw.append(int(tok))
                except ValueError:
                    raise InputError(f"{path}: line {lineno}: not an integer: {tok!r}") from None
    if not raw:
        raise InputError(f"{path}: no labels")
    return _remap(raw)


def save_labels(path, labels):
    with open(path, "w") as fh:
        fh.writelines(f"{int(v)}\n" for v in labels)


def load_data(path, points_as_rows=False):
    """Dense CSV or IDX3 (detected by magic number) as a d x m matrix."""
    with open(path, "rb") as fh:
        prefix = fh.read(4)
    if len(prefix) == 4 and struct.unpack(">I", prefix)[0] == IDX3_MAGIC:
        A = load_idx_images(path)
    else:
        A = load_dense_csv(path)
    return A.T.copy() if points_as_rows else A
