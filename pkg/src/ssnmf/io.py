"""Matrix files, hyperspectral cubes, preprocessing and abundance maps.

SSNMF1 binary layout (little endian)::

    offset 0   6 bytes   magic b"SSNMF1"
    offset 6   uint32    rows
    offset 10  uint32    cols
    offset 14  float64[rows * cols], column-major

Cube geometry travels in a JSON sidecar ``{"width", "height", "bands"}``;
pixel ``(x, y)`` is column ``y * width + x``.
"""

import csv
import json
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionError, FormatError, ParameterError
from .selection import largest_indices

MAGIC = b"SSNMF1"
HEADER = struct.Struct("<6sII")


def write_matrix(path, X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {X.shape}")
    rows, cols = X.shape
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, rows, cols))
        fh.write(X.astype("<f8").tobytes(order="F"))


def read_matrix(path):
    data = Path(path).read_bytes()
    if len(data) < HEADER.size:
        raise FormatError(f"{path}: truncated header", offset=len(data))
    magic, rows, cols = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}", offset=0)
    expected = HEADER.size + 8 * rows * cols
    if len(data) < expected:
        raise FormatError(f"{path}: truncated payload, expected {expected} bytes", offset=len(data))
    if len(data) > expected:
        raise FormatError(f"{path}: trailing bytes after payload", offset=expected)
    flat = np.frombuffer(data, dtype="<f8", count=rows * cols, offset=HEADER.size)
    bad = np.flatnonzero(~np.isfinite(flat))
    if bad.size:
        raise FormatError(f"{path}: non-finite value", offset=HEADER.size + 8 * int(bad[0]))
    return flat.reshape((rows, cols), order="F").astype(np.float64)


def read_csv(path):
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if not record or all(not cell.strip() for cell in record):
                continue
            try:
                values = [float(cell) for cell in record]
            except ValueError:
                raise FormatError(f"{path}: non-numeric cell", line=lineno) from None
            if not all(np.isfinite(values)):
                raise FormatError(f"{path}: non-finite value", line=lineno)
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise FormatError(f"{path}: expected {width} fields, got {len(values)}", line=lineno)
            rows.append(values)
    if not rows:
        raise FormatError(f"{path}: no data", line=1)
    return np.array(rows, dtype=np.float64)


def write_csv(path, X):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in np.atleast_2d(X):
            writer.writerow([repr(float(v)) for v in row])


def read_any_matrix(path):
    """Read SSNMF1, or CSV when the file has a ``.csv`` suffix."""
    if str(path).lower().endswith(".csv"):
        return read_csv(path)
    return read_matrix(path)


def write_any_matrix(path, X):
    if str(path).lower().endswith(".csv"):
        write_csv(path, X)
    else:
        write_matrix(path, X)


@dataclass(frozen=True)
class HsiCube:
    width: int
    height: int
    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 2 or self.data.shape[1] != self.width * self.height:
            raise DimensionError(
                f"cube data has shape {self.data.shape}, expected (bands, {self.width * self.height})"
            )

    @property
    def bands(self):
        return self.data.shape[0]

    def pixel(self, x, y):
        return self.data[:, y * self.width + x]


def read_sidecar(path):
    try:
        meta = json.loads(Path(path).read_text())
        return int(meta["width"]), int(meta["height"]), int(meta.get("bands", 0)) or None
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: invalid sidecar ({exc})") from None


def write_sidecar(path, width, height, bands):
    Path(path).write_text(json.dumps({"width": width, "height": height, "bands": bands}) + "\n")


def sidecar_path(matrix_path):
    return os.path.splitext(str(matrix_path))[0] + ".json"


def load_cube(path, width=None, height=None, sidecar=None):
    """Load a cube from a matrix file plus explicit geometry or a sidecar."""
    X = read_any_matrix(path)
    bands = None
    if width is None or height is None:
        width, height, bands = read_sidecar(sidecar or sidecar_path(path))
    if bands is not None and bands != X.shape[0]:
        raise FormatError(f"sidecar declares {bands} bands but the matrix has {X.shape[0]} rows")
    return HsiCube(width, height, X)


def clip_extremes(cube, k=10):
    """Zero every pixel that is among the ``k`` largest of some band.

    Returns ``(clipped_cube, removed)`` with ``removed`` the sorted pixel
    columns that were zeroed.
    """
    X = cube.data
    if not 1 <= k <= X.shape[1]:
        raise ParameterError(f"k={k} must lie in [1, n={X.shape[1]}]")
    removed = np.unique(np.concatenate([largest_indices(row, k) for row in X]))
    clipped = X.copy()
    clipped[:, removed] = 0.0
    return HsiCube(cube.width, cube.height, clipped), removed


def quantize_map(row):
    """Scale a nonnegative row to 0..255 with round-half-up; zero row stays zero."""
    row = np.asarray(row, dtype=np.float64)
    top = row.max()
    if top <= 0:
        return np.zeros(row.shape, dtype=np.uint8)
    return np.floor(255.0 * row / top + 0.5).astype(np.uint8)


def write_pgm(path, pixels):
    pixels = np.asarray(pixels, dtype=np.uint8)
    height, width = pixels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())


def write_abundance_maps(H, width, height, dir_path):
    """One 8-bit PGM image per row of ``H``; returns the written paths."""
    H = np.asarray(H, dtype=np.float64)
    if H.ndim != 2 or H.shape[1] != width * height:
        raise DimensionError(f"H has shape {H.shape}, expected (r, {width * height})")
    out = Path(dir_path)
    out.mkdir(parents=True, exist_ok=True)
    digits = max(2, len(str(H.shape[0])))
    paths = []
    for k, row in enumerate(H, start=1):
        path = out / f"endmember_{k:0{digits}d}.pgm"
        write_pgm(path, quantize_map(row).reshape(height, width))
        paths.append(path)
    return paths
