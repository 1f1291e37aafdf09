"""Nonlocal interaction kernel J and the bounded-domain convolution engine.

J is tabulated on every grid offset (p*hx, q*hy), |p| < nx, |q| < ny, so that
(J*f)(x_i) = sum_j J(x_i - y_j) f(y_j) hx hy restricted to the domain. The sum is
evaluated with zero-padded real FFTs (no periodic wraparound); a direct
summation is kept as the reference implementation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy import fft as sfft

from app.config import get_config
from app.errors import ConfigError
from .grid import Grid2D
from .operators import grid_operators

logger = logging.getLogger(__name__)


def _offsets(grid: Grid2D) -> Tuple[np.ndarray, np.ndarray]:
    px = np.arange(-(grid.nx - 1), grid.nx) * grid.hx
    py = np.arange(-(grid.ny - 1), grid.ny) * grid.hy
    return np.meshgrid(px, py, indexing="ij")


def gaussian_normalization(sigma: float, radius: float, strength: float) -> float:
    """Amplitude A such that the truncated profile integrates to `strength` over the plane."""
    g_r = np.exp(-radius**2 / (2 * sigma**2))
    mass = 2 * np.pi * (sigma**2 * (1 - g_r) - g_r * (radius**2 / 2 + radius**4 / (8 * sigma**2)))
    return strength / mass


def truncated_gaussian(r2: np.ndarray, sigma: float, radius: float, amplitude: float) -> np.ndarray:
    """C1 truncated Gaussian: value and radial slope vanish at r = radius."""
    g = np.exp(-r2 / (2 * sigma**2))
    g_r = np.exp(-radius**2 / (2 * sigma**2))
    vals = amplitude * (g - g_r * (1 + (radius**2 - r2) / (2 * sigma**2)))
    return np.where(r2 < radius**2, vals, 0.0)


def truncated_gaussian_gradient(x: np.ndarray, y: np.ndarray, sigma: float, radius: float,
                                amplitude: float) -> np.ndarray:
    r2 = x * x + y * y
    g = np.exp(-r2 / (2 * sigma**2))
    g_r = np.exp(-radius**2 / (2 * sigma**2))
    factor = np.where(r2 < radius**2, amplitude * (g_r - g) / sigma**2, 0.0)
    return np.stack([factor * x, factor * y])


@dataclass(eq=False)
class Kernel:
    """Tabulated kernel with its padded spectrum and derived a(x) = (J*1)(x)."""

    grid: Grid2D
    table: np.ndarray
    profile: str = "table"
    params: dict = field(default_factory=dict)
    gradient_table: Optional[np.ndarray] = None
    workers: int = 1

    def __post_init__(self):
        expected = (2 * self.grid.nx - 1, 2 * self.grid.ny - 1)
        if self.table.shape != expected:
            raise ConfigError(f"Kernel table has shape {self.table.shape}, expected {expected}")
        self._fft_shape = tuple(sfft.next_fast_len(3 * n - 2, real=True) for n in self.grid.shape)
        self._spectrum = sfft.rfftn(self.table, s=self._fft_shape, workers=self.workers)
        self._grad_spectra = None
        if self.gradient_table is not None:
            self._grad_spectra = [
                sfft.rfftn(self.gradient_table[k], s=self._fft_shape, workers=self.workers) for k in range(2)
            ]
        self.a = self.convolve(np.ones(self.grid.shape))
        self.grad_a = grid_operators(self.grid).gradient(self.a)

    @classmethod
    def gaussian(cls, grid: Grid2D, sigma: float = 0.1, strength: float = 6.0,
                 radius_factor: float = 4.0, workers: Optional[int] = None) -> "Kernel":
        radius = radius_factor * sigma
        amp = gaussian_normalization(sigma, radius, strength)
        ox, oy = _offsets(grid)
        table = truncated_gaussian(ox * ox + oy * oy, sigma, radius, amp)
        grad_table = truncated_gaussian_gradient(ox, oy, sigma, radius, amp)
        if workers is None:
            workers = get_config().runtime.threads
        logger.debug("Gaussian kernel sigma=%g R=%g amplitude=%g", sigma, radius, amp)
        return cls(grid=grid, table=table, profile="gaussian",
                   params={"sigma": sigma, "strength": strength, "radius": radius},
                   gradient_table=grad_table, workers=workers)

    @classmethod
    def from_table(cls, grid: Grid2D, table: np.ndarray, workers: int = 1) -> "Kernel":
        """Inject an arbitrary tabulated kernel (constant or odd kernels in tests)."""
        return cls(grid=grid, table=np.asarray(table, dtype=float), workers=workers)

    @classmethod
    def constant(cls, grid: Grid2D, value: float) -> "Kernel":
        return cls.from_table(grid, np.full((2 * grid.nx - 1, 2 * grid.ny - 1), float(value)))

    # ------------------------------------------------------------------
    def _apply(self, spectrum: np.ndarray, f: np.ndarray) -> np.ndarray:
        nx, ny = self.grid.shape
        fh = sfft.rfftn(f, s=self._fft_shape, workers=self.workers)
        full = sfft.irfftn(fh * spectrum, s=self._fft_shape, workers=self.workers)
        return full[nx - 1:2 * nx - 1, ny - 1:2 * ny - 1] * self.grid.cell_area

    def convolve(self, f: np.ndarray) -> np.ndarray:
        """Bounded-domain (J*f)(x_i)."""
        self.grid.check_scalar(f)
        return self._apply(self._spectrum, f)

    def convolve_gradient(self, g: np.ndarray) -> np.ndarray:
        """sum_j grad J(x_i - y_j) . g(y_j) hx hy, using the analytic gradient table."""
        if self._grad_spectra is None:
            raise ConfigError("Kernel has no analytic gradient table")
        self.grid.check_vector(g)
        return self._apply(self._grad_spectra[0], g[0]) + self._apply(self._grad_spectra[1], g[1])

    def convolve_gradient_scalar(self, f: np.ndarray) -> np.ndarray:
        """(grad J * f)(x_i), a vector field."""
        if self._grad_spectra is None:
            raise ConfigError("Kernel has no analytic gradient table")
        return np.stack([self._apply(self._grad_spectra[k], f) for k in range(2)])

    @property
    def evenness_defect(self) -> float:
        return float(np.max(np.abs(self.table - self.table[::-1, ::-1])))

    @property
    def a_min(self) -> float:
        return float(np.min(self.a))


def direct_convolve(kernel: Kernel, f: np.ndarray) -> np.ndarray:
    """O(N^2) reference summation of the bounded-domain convolution."""
    grid = kernel.grid
    nx, ny = grid.shape
    out = np.empty(grid.shape)
    t = kernel.table
    for i in range(nx):
        for k in range(ny):
            out[i, k] = np.sum(f * t[i:i + nx, k:k + ny][::-1, ::-1])
    return out * grid.cell_area


def convolve(kernel: Kernel, f: np.ndarray) -> np.ndarray:
    return kernel.convolve(f)
