"""Brinkman saddle-point solver.

-nu Lap u + eta u + grad pi = f, div u = 0, u = 0 on the walls, mean(pi) = 0.

The discrete system is assembled as the symmetric bordered matrix

    [ A    G   0 ] [u ]   [f]
    [ G^T  0   e ] [pi] = [0]
    [ 0    e^T 0 ] [l ]   [0]

with A = nu (-Lap_D) + diag(eta) per component, G the cell gradient and e the
normalized constant vector pinning the pressure mean. Since G^T = -div, the
second row is the divergence constraint. Up to `direct_max_cells` cells the
matrix is factorized once; larger grids use MINRES with a block-diagonal
preconditioner.
"""

from __future__ import annotations

import logging
from typing import Literal, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse import linalg as spla

from app.errors import NumericalError
from app.fields.grid import Grid2D
from app.fields.operators import grid_operators
from app.run_config import SolverSection, TolerancesSection

logger = logging.getLogger(__name__)


def korteweg_rhs(model, phi: np.ndarray, kphi: Optional[np.ndarray] = None) -> np.ndarray:
    """Gradient-free part of mu grad(phi): -(grad a) phi^2/2 - (J*phi) grad(phi).

    a phi grad(phi) + F'(phi) grad(phi) differ from -(grad a) phi^2/2 by a gradient,
    which the pressure absorbs on divergence-free velocities.
    """
    if kphi is None:
        kphi = model.kernel.convolve(phi)
    gphi = model.ops.gradient(phi)
    return -0.5 * model.grad_a * phi * phi - kphi * gphi


def korteweg_rhs_derivative(model, phi: np.ndarray, psi: np.ndarray, kphi: Optional[np.ndarray] = None,
                            kpsi: Optional[np.ndarray] = None) -> np.ndarray:
    """Directional derivative of `korteweg_rhs` at phi along psi."""
    ops = model.ops
    if kphi is None:
        kphi = model.kernel.convolve(phi)
    if kpsi is None:
        kpsi = model.kernel.convolve(psi)
    return -model.grad_a * phi * psi - kpsi * ops.gradient(phi) - kphi * ops.gradient(psi)


def korteweg_rhs_transpose(model, phi: np.ndarray, y: np.ndarray, kphi: Optional[np.ndarray] = None) -> np.ndarray:
    """Euclidean transpose of `korteweg_rhs_derivative` applied to a vector field y."""
    ops = model.ops
    if kphi is None:
        kphi = model.kernel.convolve(phi)
    gphi = ops.gradient(phi)
    out = -phi * np.sum(model.grad_a * y, axis=0)
    out -= model.kernel.convolve(np.sum(gphi * y, axis=0))
    out -= (ops.grad.T @ (kphi * y).ravel()).reshape(model.grid.shape)
    return out


class BrinkmanSolver:
    """Factorized (or preconditioned) Brinkman operator on one grid."""

    def __init__(self, grid: Grid2D, nu: float, eta, solver: Optional[SolverSection] = None,
                 tolerances: Optional[TolerancesSection] = None):
        self.grid = grid
        self.nu = float(nu)
        self.eta = np.broadcast_to(np.asarray(eta, dtype=float), grid.shape)
        self.solver = solver or SolverSection()
        self.tolerances = tolerances or TolerancesSection()
        ops = grid_operators(grid)
        self.ops = ops
        n = grid.size
        self.n = n
        lap = ops.dirichlet_laplacian
        block = (self.nu * (-lap) + sp.diags(self.eta.ravel())).tocsc()
        a_mat = sp.block_diag([block, block], format="csr")
        e = sp.csr_matrix(np.full((n, 1), 1.0 / np.sqrt(n)))
        self.matrix = sp.bmat([
            [a_mat, ops.grad, None],
            [ops.grad.T, None, e],
            [None, e.T, None],
        ], format="csc")
        self.method: Literal["direct", "minres"] = (
            "direct" if n <= self.solver.direct_max_cells else "minres")
        if self.method == "direct":
            self._lu = spla.splu(self.matrix)
        else:
            self._block_lu = spla.splu(block)
            self._precond = self._build_preconditioner()
        logger.debug("Brinkman operator %s, %d unknowns", self.method, self.matrix.shape[0])

    def _build_preconditioner(self) -> spla.LinearOperator:
        n = self.n
        # the pressure Schur complement is close to (1/nu) I away from the walls
        scale = self.nu + float(np.max(self.eta)) * self.grid.h_min ** 2

        def apply(x):
            out = np.empty_like(x)
            out[:n] = self._block_lu.solve(x[:n])
            out[n:2 * n] = self._block_lu.solve(x[n:2 * n])
            out[2 * n:] = scale * x[2 * n:]
            return out

        size = self.matrix.shape[0]
        return spla.LinearOperator((size, size), matvec=apply)

    def _solve_system(self, b: np.ndarray) -> Tuple[np.ndarray, int]:
        if self.method == "direct":
            x = self._lu.solve(b)
            # one step of iterative refinement
            x += self._lu.solve(b - self.matrix @ x)
            return x, 1
        iters = 0

        def count(_):
            nonlocal iters
            iters += 1

        x, info = spla.minres(self.matrix, b, M=self._precond, rtol=1e-12,
                              maxiter=self.solver.minres_max_iters, callback=count)
        if info != 0:
            res = float(np.linalg.norm(b - self.matrix @ x) / max(np.linalg.norm(b), 1e-300))
            raise NumericalError(f"MINRES did not converge in {iters} iterations (relative residual {res:.3e})",
                                 residual=res)
        return x, iters

    def solve(self, force: np.ndarray, check_div: bool = True) -> Tuple[np.ndarray, np.ndarray, int]:
        """Return (u, pi, iterations) for the body force `force`."""
        grid = self.grid
        grid.check_vector(force, "Brinkman right-hand side")
        n = self.n
        if not np.all(np.isfinite(force)):
            raise NumericalError("Non-finite Brinkman right-hand side")
        b = np.zeros(self.matrix.shape[0])
        b[:2 * n] = force.ravel()
        x, iters = self._solve_system(b)
        u = x[:2 * n].reshape(2, grid.nx, grid.ny)
        pi = x[2 * n:3 * n].reshape(grid.shape)
        if check_div:
            div_max = float(np.max(np.abs(self.ops.divergence(u))))
            if div_max > self.tolerances.div_tol:
                raise NumericalError(f"Velocity divergence {div_max:.3e} exceeds div_tol "
                                     f"{self.tolerances.div_tol:.1e}", residual=div_max)
        return u, pi, iters


def brinkman_solve(phi: np.ndarray, mu: np.ndarray, force: np.ndarray, model,
                   form: Literal["rewritten", "korteweg"] = "rewritten") -> Tuple[np.ndarray, np.ndarray]:
    """Velocity and mean-zero pressure driven by the phase field and a body force.

    `rewritten` uses the gradient-free capillary force and ignores mu; `korteweg`
    uses mu grad(phi) directly, which differs only by a discrete gradient.
    """
    if form == "korteweg":
        rhs = mu * model.ops.gradient(phi) + force
    else:
        rhs = korteweg_rhs(model, phi) + force
    u, pi, _ = model.brinkman.solve(rhs)
    return u, pi
