"""Finite-volume difference operators on a Grid2D.

The gradient is centered with a mirrored (homogeneous Neumann) ghost cell. The
no-slip divergence is its exact negative transpose, so summation by parts holds
to rounding. The variable-coefficient Laplacian uses face-averaged coefficients
and zero boundary flux.

The mirrored wall row is second order for fields with zero normal derivative
and only first order otherwise (a and J*phi near the walls). A one-sided
three-point row would make -grad.T inconsistent as a divergence in the wall
cells, so the mirror is kept.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np
import scipy.sparse as sp

from app.errors import DomainError
from .grid import Grid2D

logger = logging.getLogger(__name__)


def _centered_1d(n: int, h: float) -> sp.csr_matrix:
    d = sp.diags([-np.ones(n - 1), np.ones(n - 1)], [-1, 1], shape=(n, n)).tolil()
    d[0, 0] = -1.0
    d[n - 1, n - 1] = 1.0
    return (d / (2.0 * h)).tocsr()


def _open_divergence_1d(n: int, h: float) -> sp.csr_matrix:
    d = sp.diags([-np.ones(n - 1), np.ones(n - 1)], [-1, 1], shape=(n, n)).tolil()
    d[0, :3] = [-3.0, 4.0, -1.0]
    d[n - 1, n - 3:] = [1.0, -4.0, 3.0]
    return (d / (2.0 * h)).tocsr()


def _face_difference_1d(n: int, h: float) -> sp.csr_matrix:
    return (sp.diags([-np.ones(n - 1), np.ones(n - 1)], [0, 1], shape=(n - 1, n)) / h).tocsr()


def _face_average_1d(n: int) -> sp.csr_matrix:
    return sp.diags([0.5 * np.ones(n - 1), 0.5 * np.ones(n - 1)], [0, 1], shape=(n - 1, n)).tocsr()


def _dirichlet_second_1d(n: int, h: float) -> sp.csr_matrix:
    main = -2.0 * np.ones(n)
    main[0] = main[-1] = -3.0
    off = np.ones(n - 1)
    return (sp.diags([off, main, off], [-1, 0, 1]) / (h * h)).tocsr()


@dataclass(frozen=True, eq=False)
class GridOperators:
    """Sparse operators of one grid, acting on row-major flattened fields."""

    grid: Grid2D
    grad_x: sp.csr_matrix
    grad_y: sp.csr_matrix
    grad: sp.csr_matrix             # (2n, n)
    div: sp.csr_matrix              # (n, 2n), equals -grad.T
    div_open: sp.csr_matrix         # (n, 2n), one-sided second order at the walls
    diff_x: sp.csr_matrix           # x-faces, interior only
    diff_y: sp.csr_matrix
    avg_x: sp.csr_matrix
    avg_y: sp.csr_matrix
    dirichlet_laplacian: sp.csr_matrix  # compact 5-point, odd ghost (no-slip walls)

    # ---- array helpers -------------------------------------------------
    def gradient(self, f: np.ndarray) -> np.ndarray:
        flat = f.ravel()
        g = self.grid
        return np.stack([(self.grad_x @ flat).reshape(g.shape), (self.grad_y @ flat).reshape(g.shape)])

    def divergence(self, v: np.ndarray) -> np.ndarray:
        return (self.div @ v.ravel()).reshape(self.grid.shape)

    def laplacian_matrix(self, c: np.ndarray) -> sp.csr_matrix:
        """Matrix of f -> div(c grad f) with face-averaged c and zero boundary flux."""
        flat = c.ravel()
        cx = self.avg_x @ flat
        cy = self.avg_y @ flat
        lap = self.diff_x.T @ sp.diags(cx) @ self.diff_x + self.diff_y.T @ sp.diags(cy) @ self.diff_y
        return (-lap).tocsr()

    def coefficient_action(self, phi: np.ndarray, dc: np.ndarray) -> np.ndarray:
        """Derivative of L(c) phi with respect to c, applied to dc."""
        p = phi.ravel()
        d = dc.ravel()
        out = self.diff_x.T @ ((self.diff_x @ p) * (self.avg_x @ d))
        out += self.diff_y.T @ ((self.diff_y @ p) * (self.avg_y @ d))
        return (-out).reshape(self.grid.shape)

    def coefficient_action_transpose(self, phi: np.ndarray, z: np.ndarray) -> np.ndarray:
        p = phi.ravel()
        zz = z.ravel()
        out = self.avg_x.T @ ((self.diff_x @ p) * (self.diff_x @ zz))
        out += self.avg_y.T @ ((self.diff_y @ p) * (self.diff_y @ zz))
        return (-out).reshape(self.grid.shape)


@lru_cache(maxsize=16)
def grid_operators(grid: Grid2D) -> GridOperators:
    nx, ny, hx, hy = grid.nx, grid.ny, grid.hx, grid.hy
    ix, iy = sp.identity(nx, format="csr"), sp.identity(ny, format="csr")

    gx = sp.kron(_centered_1d(nx, hx), iy, format="csr")
    gy = sp.kron(ix, _centered_1d(ny, hy), format="csr")
    grad = sp.vstack([gx, gy], format="csr")

    dox = sp.kron(_open_divergence_1d(nx, hx), iy, format="csr")
    doy = sp.kron(ix, _open_divergence_1d(ny, hy), format="csr")

    lap_d = sp.kron(_dirichlet_second_1d(nx, hx), iy) + sp.kron(ix, _dirichlet_second_1d(ny, hy))

    logger.debug("Assembled operators for %dx%d grid", nx, ny)
    return GridOperators(
        grid=grid,
        grad_x=gx,
        grad_y=gy,
        grad=grad,
        div=(-grad.T).tocsr(),
        div_open=sp.hstack([dox, doy], format="csr"),
        diff_x=sp.kron(_face_difference_1d(nx, hx), iy, format="csr"),
        diff_y=sp.kron(ix, _face_difference_1d(ny, hy), format="csr"),
        avg_x=sp.kron(_face_average_1d(nx), iy, format="csr"),
        avg_y=sp.kron(ix, _face_average_1d(ny), format="csr"),
        dirichlet_laplacian=lap_d.tocsr(),
    )


def gradient(grid: Grid2D, f: np.ndarray) -> np.ndarray:
    """Centered gradient with a mirrored ghost cell at the walls."""
    grid.check_scalar(f)
    return grid_operators(grid).gradient(f)


def divergence(grid: Grid2D, v: np.ndarray, closure: Literal["open", "no_slip"] = "open") -> np.ndarray:
    """Discrete divergence.

    `no_slip` is the exact negative transpose of `gradient` (odd ghost cells); it
    is the operator the solvers use. `open` uses one-sided second-order
    differences at the walls and is exact for constant and linear fields.
    """
    grid.check_vector(v)
    ops = grid_operators(grid)
    mat = ops.div if closure == "no_slip" else ops.div_open
    return (mat @ v.ravel()).reshape(grid.shape)


def variable_coefficient_laplacian(grid: Grid2D, c: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Conservative div(c grad f) with homogeneous Neumann flux."""
    grid.check_scalar(c, "coefficient")
    grid.check_scalar(f)
    if np.any(c < 0):
        raise DomainError(f"Diffusion coefficient must be non-negative, min is {float(np.min(c)):.3e}")
    return (grid_operators(grid).laplacian_matrix(c) @ f.ravel()).reshape(grid.shape)
