"""Builtin initial phase fields and control/forcing fields of a run configuration."""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np
from scipy.ndimage import gaussian_filter

from app.errors import ConfigError
from app.fields.grid import Grid2D
from app.run_config import ForcingSection, InitialSection
from app.storage.chbf import read_field, read_series

logger = logging.getLogger(__name__)

CONTROL_SERIES = "control"


def _smoothed_noise(grid: Grid2D, seed: int, smoothing: float) -> np.ndarray:
    rng = np.random.default_rng(seed)
    noise = rng.uniform(-1.0, 1.0, size=grid.shape)
    if smoothing > 0:
        noise = gaussian_filter(noise, sigma=smoothing, mode="reflect")
    noise -= noise.mean()
    peak = float(np.max(np.abs(noise)))
    return noise / peak if peak > 0 else noise


def initial_phase(section: InitialSection, grid: Grid2D, seed: int) -> np.ndarray:
    """phi0 from a CHBF file or a builtin pattern; |phi0| must stay within phi0_cap."""
    if section.path is not None:
        phi0 = read_field(section.path, grid)
        source = str(section.path)
    else:
        x, y = grid.centers()
        p = section.pattern
        if p == "constant":
            phi0 = np.full(grid.shape, section.mean)
        elif p == "cosine":
            k = section.wavenumber * np.pi
            phi0 = section.mean + section.amplitude * np.cos(k * x / grid.lx) * np.cos(k * y / grid.ly)
        elif p == "disk":
            r = np.hypot(x - 0.5 * grid.lx, y - 0.5 * grid.ly)
            phi0 = section.mean + section.amplitude * np.tanh((section.radius - r) / section.width)
        else:
            phi0 = section.mean + section.amplitude * _smoothed_noise(grid, seed, section.smoothing)
        source = f"pattern '{p}'"

    peak = float(np.max(np.abs(phi0)))
    if peak > section.phi0_cap:
        raise ConfigError(f"Initial phase field from {source} reaches |phi0| = {peak:.4f} > "
                          f"phi0_cap = {section.phi0_cap}")
    logger.info("Initial phase field from %s: mean %.4f, max|phi0| %.4f", source, float(phi0.mean()), peak)
    return phi0


def vortex_field(grid: Grid2D, amplitude: float = 1.0) -> np.ndarray:
    """Divergence-free swirl from the stream function sin^2(pi x) sin^2(pi y), vanishing on the walls."""
    x, y = grid.centers()
    kx, ky = np.pi / grid.lx, np.pi / grid.ly
    sx, sy = np.sin(kx * x), np.sin(ky * y)
    # u = (d/dy psi, -d/dx psi)
    ux = sx ** 2 * 2.0 * ky * sy * np.cos(ky * y)
    uy = -2.0 * kx * sx * np.cos(kx * x) * sy ** 2
    field = np.stack([ux, uy])
    return amplitude * field / float(np.max(np.abs(field)))


def control_series(section: Optional[ForcingSection], grid: Grid2D, n_steps: int) -> np.ndarray:
    """Space-time control of shape (N, 2, nx, ny), constant in time for builtin patterns."""
    shape = (n_steps, 2, grid.nx, grid.ny)
    if section is None:
        return np.zeros(shape)
    if section.path is not None:
        series = read_series(section.path, CONTROL_SERIES, grid, vector=True)
        if series.shape[0] != n_steps:
            raise ConfigError(f"Control series in {section.path} has {series.shape[0]} entries, "
                              f"run has {n_steps} steps")
        logger.info("Control loaded from %s", section.path)
        return series
    if section.pattern == "zero":
        return np.zeros(shape)
    if section.pattern == "constant":
        field = np.empty((2,) + grid.shape)
        field[0] = section.value[0]
        field[1] = section.value[1]
    else:
        field = vortex_field(grid, section.amplitude)
    return np.broadcast_to(field, shape).copy()
