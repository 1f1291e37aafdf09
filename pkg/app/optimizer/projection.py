"""Admissible controls: componentwise boxes U_1 <= U <= U_2, constant in time."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from app.errors import ConfigError
from app.fields.grid import Grid2D

BoundLike = Union[float, Sequence[float], np.ndarray]


def _as_field(value: BoundLike, grid: Grid2D, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 1:
        if arr.shape != (2,):
            raise ConfigError(f"{name} needs one value per component, got {arr.shape}")
        arr = arr[:, None, None]
    try:
        return np.broadcast_to(arr, (2,) + grid.shape).copy()
    except ValueError:
        raise ConfigError(f"{name} of shape {arr.shape} does not broadcast to {(2,) + grid.shape}")


@dataclass(eq=False)
class Bounds:
    lower: np.ndarray  # (2, nx, ny)
    upper: np.ndarray

    def __post_init__(self):
        if self.lower.shape != self.upper.shape:
            raise ConfigError(f"Bound shapes differ: {self.lower.shape} vs {self.upper.shape}")
        bad = self.lower > self.upper
        if np.any(bad):
            idx = tuple(int(i) for i in np.argwhere(bad)[0])
            raise ConfigError(f"Lower bound exceeds upper bound at component/cell {idx}: "
                              f"{self.lower[idx]} > {self.upper[idx]}")

    @classmethod
    def box(cls, grid: Grid2D, lower: BoundLike, upper: BoundLike) -> "Bounds":
        return cls(_as_field(lower, grid, "lower bound"), _as_field(upper, grid, "upper bound"))

    @property
    def degenerate(self) -> bool:
        return bool(np.all(self.lower == self.upper))

    def project(self, U: np.ndarray) -> np.ndarray:
        return project(U, self.lower, self.upper)

    def contains(self, U: np.ndarray, tol: float = 0.0) -> bool:
        return bool(np.all(U >= self.lower - tol) and np.all(U <= self.upper + tol))

    def sample(self, rng: np.random.Generator, n_steps: int) -> np.ndarray:
        """Uniform random admissible control of shape (N, 2, nx, ny)."""
        shape = (n_steps,) + self.lower.shape
        return self.lower + (self.upper - self.lower) * rng.uniform(0.0, 1.0, size=shape)


def project(U: np.ndarray, lower: BoundLike, upper: BoundLike, grid: Optional[Grid2D] = None) -> np.ndarray:
    """Componentwise clamp max(U_1, min(U, U_2)); bounds broadcast against U."""
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    if grid is not None:
        lo, hi = _as_field(lo, grid, "lower bound"), _as_field(hi, grid, "upper bound")
    else:
        # per-component pairs apply along the component axis
        lo = lo[:, None, None] if lo.shape == (2,) else lo
        hi = hi[:, None, None] if hi.shape == (2,) else hi
    if np.any(lo > hi):
        raise ConfigError("Lower bound exceeds upper bound")
    return np.maximum(lo, np.minimum(np.asarray(U, dtype=float), hi))
