"""Uniform cell-centered grid on a rectangle.

Scalar fields are numpy arrays of shape (nx, ny) with axis 0 along x; vector
fields have shape (2, nx, ny). Flattening is row-major, index = i*ny + j.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from app.errors import ConfigError


@dataclass(frozen=True)
class Grid2D:
    nx: int
    ny: int
    lx: float = 1.0
    ly: float = 1.0

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise ConfigError(f"Grid needs at least 4 cells per axis, got {self.nx}x{self.ny}")
        if not (self.lx > 0 and self.ly > 0):
            raise ConfigError(f"Domain lengths must be positive, got {self.lx}x{self.ly}")

    @property
    def hx(self) -> float:
        return self.lx / self.nx

    @property
    def hy(self) -> float:
        return self.ly / self.ny

    @property
    def h_min(self) -> float:
        return min(self.hx, self.hy)

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    @property
    def area(self) -> float:
        return self.lx * self.ly

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def size(self) -> int:
        return self.nx * self.ny

    def centers(self) -> Tuple[np.ndarray, np.ndarray]:
        """Cell-center coordinates (X, Y), each of shape (nx, ny)."""
        x = (np.arange(self.nx) + 0.5) * self.hx
        y = (np.arange(self.ny) + 0.5) * self.hy
        return np.meshgrid(x, y, indexing="ij")

    def refined(self, factor: int = 2) -> "Grid2D":
        return Grid2D(self.nx * factor, self.ny * factor, self.lx, self.ly)

    # Discrete L2 pairings with equal cell weights
    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        return float(np.sum(f * g) * self.cell_area)

    def norm(self, f: np.ndarray) -> float:
        return float(np.sqrt(np.sum(f * f) * self.cell_area))

    def integrate(self, f: np.ndarray) -> float:
        return float(np.sum(f) * self.cell_area)

    def mean(self, f: np.ndarray) -> float:
        return float(np.mean(f))

    def check_scalar(self, f: np.ndarray, name: str = "field") -> np.ndarray:
        if np.shape(f) != self.shape:
            raise ConfigError(f"{name} has shape {np.shape(f)}, expected {self.shape}")
        return f

    def check_vector(self, v: np.ndarray, name: str = "vector field") -> np.ndarray:
        if np.shape(v) != (2, self.nx, self.ny):
            raise ConfigError(f"{name} has shape {np.shape(v)}, expected {(2, self.nx, self.ny)}")
        return v
