"""CHBF binary field snapshots.

Layout: magic "CHBF", u8 version, u32 nx, u32 ny, f64 lx, f64 ly (29 bytes,
little-endian), then nx*ny f64 values in row-major order. Vector files add a
u8 component count (2) after the header and carry two consecutive payloads.
Series live in one directory as `<name>_<index:06d>.chbf`.
"""

from __future__ import annotations

import logging
import re
from pathlib import Path
from typing import Iterable, List, Tuple, Union

import numpy as np

from app.errors import ConfigError
from app.fields.grid import Grid2D

logger = logging.getLogger(__name__)

MAGIC = b"CHBF"
VERSION = 1
HEADER_DTYPE = np.dtype([
    ("magic", "S4"),
    ("version", "u1"),
    ("nx", "<u4"),
    ("ny", "<u4"),
    ("lx", "<f8"),
    ("ly", "<f8"),
])
PAYLOAD_DTYPE = np.dtype("<f8")

PathLike = Union[str, Path]


def _header(grid: Grid2D) -> bytes:
    h = np.zeros((), dtype=HEADER_DTYPE)
    h["magic"] = MAGIC
    h["version"] = VERSION
    h["nx"] = grid.nx
    h["ny"] = grid.ny
    h["lx"] = grid.lx
    h["ly"] = grid.ly
    return h.tobytes()


def encode_field(grid: Grid2D, field: np.ndarray) -> bytes:
    """Serialize a scalar (nx, ny) or vector (2, nx, ny) field."""
    field = np.asarray(field, dtype=float)
    if field.shape == grid.shape:
        return _header(grid) + field.astype(PAYLOAD_DTYPE).tobytes(order="C")
    if field.shape == (2, grid.nx, grid.ny):
        return _header(grid) + bytes([2]) + field.astype(PAYLOAD_DTYPE).tobytes(order="C")
    raise ConfigError(f"Field of shape {field.shape} does not live on a {grid.nx}x{grid.ny} grid")


def decode_field(data: bytes, source: str = "<bytes>") -> Tuple[Grid2D, np.ndarray]:
    """Parse CHBF bytes into (grid, field); the field is vector-valued when the size says so."""
    hsize = HEADER_DTYPE.itemsize
    if len(data) < hsize:
        raise ConfigError(f"{source}: truncated CHBF header ({len(data)} bytes)")
    h = np.frombuffer(data[:hsize], dtype=HEADER_DTYPE)[0]
    if bytes(h["magic"]) != MAGIC:
        raise ConfigError(f"{source}: bad magic {bytes(h['magic'])!r}")
    if int(h["version"]) != VERSION:
        raise ConfigError(f"{source}: unsupported CHBF version {int(h['version'])}")
    grid = Grid2D(int(h["nx"]), int(h["ny"]), float(h["lx"]), float(h["ly"]))
    n = grid.size * PAYLOAD_DTYPE.itemsize
    body = data[hsize:]
    if len(body) == n:
        return grid, np.frombuffer(body, dtype=PAYLOAD_DTYPE).reshape(grid.shape).copy()
    if len(body) == 1 + 2 * n:
        if body[0] != 2:
            raise ConfigError(f"{source}: unsupported component count {body[0]}")
        vals = np.frombuffer(body[1:], dtype=PAYLOAD_DTYPE)
        return grid, vals.reshape(2, grid.nx, grid.ny).copy()
    raise ConfigError(f"{source}: payload of {len(body)} bytes does not match a {grid.nx}x{grid.ny} field")


def write_snapshot(path: PathLike, grid: Grid2D, field: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_field(grid, field))
    logger.debug("Wrote CHBF %s", path)
    return path


def read_snapshot(path: PathLike) -> Tuple[Grid2D, np.ndarray]:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise ConfigError(f"Cannot read CHBF file {path}: {e}")
    return decode_field(data, source=str(path))


def read_field(path: PathLike, grid: Grid2D, vector: bool = False) -> np.ndarray:
    """Read a snapshot and check it lives on `grid`."""
    file_grid, field = read_snapshot(path)
    if file_grid != grid:
        raise ConfigError(f"{path}: grid {file_grid} does not match run grid {grid}")
    expected = (2, grid.nx, grid.ny) if vector else grid.shape
    if field.shape != expected:
        kind = "vector" if vector else "scalar"
        raise ConfigError(f"{path}: expected a {kind} field")
    return field


def series_path(directory: PathLike, name: str, index: int) -> Path:
    return Path(directory) / f"{name}_{index:06d}.chbf"


def write_series(directory: PathLike, name: str, grid: Grid2D, fields: Iterable[np.ndarray]) -> List[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = [write_snapshot(series_path(directory, name, k), grid, f) for k, f in enumerate(fields)]
    logger.info("Wrote %d-entry CHBF series %s in %s", len(paths), name, directory)
    return paths


def read_series(directory: PathLike, name: str, grid: Grid2D, vector: bool = False) -> np.ndarray:
    """Stack `<name>_000000.chbf` ... in index order; indices must be contiguous from 0."""
    directory = Path(directory)
    pattern = re.compile(rf"^{re.escape(name)}_(\d{{6}})\.chbf$")
    indexed = sorted((int(m.group(1)), p) for p in directory.glob(f"{name}_*.chbf")
                     if (m := pattern.match(p.name)))
    if not indexed:
        raise ConfigError(f"No CHBF series '{name}' in {directory}")
    for expect, (k, p) in enumerate(indexed):
        if k != expect:
            raise ConfigError(f"CHBF series '{name}' in {directory} is missing index {expect}")
    return np.stack([read_field(p, grid, vector) for _, p in indexed])
