"""Semi-implicit Cahn-Hilliard step with frozen implicit coefficient.

    (I - dt L(c(phi^n))) phi^{n+1} = phi^n + dt [ -div(u phi^n) + div(m(phi^n) V(phi^n)) ]

with c = m a + lambda and V = phi grad(a) - grad(J*phi). Every explicit term is
in flux form with zero wall flux, so the mean of phi is conserved.
"""

from __future__ import annotations

import logging
from typing import Literal, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse import linalg as spla

from app.errors import NumericalError

logger = logging.getLogger(__name__)


def chemical_potential(phi: np.ndarray, model, kphi: Optional[np.ndarray] = None) -> np.ndarray:
    """mu = a phi - J*phi + F_delta'(phi)."""
    if kphi is None:
        kphi = model.kernel.convolve(phi)
    return model.a * phi - kphi + model.tables.dF(phi)


def nonlocal_drift(model, phi: np.ndarray, kphi: Optional[np.ndarray] = None) -> np.ndarray:
    """V = phi grad(a) - grad(J*phi), the explicit nonlocal flux per unit mobility."""
    if kphi is None:
        kphi = model.kernel.convolve(phi)
    return phi * model.grad_a - model.ops.gradient(kphi)


def implicit_coefficient(model, phi: np.ndarray) -> np.ndarray:
    return model.tables.coefficient(phi, model.a)


def step_matrix(model, phi: np.ndarray, dt: float) -> sp.csr_matrix:
    lap = model.ops.laplacian_matrix(implicit_coefficient(model, phi))
    return (sp.identity(model.grid.size, format="csr") - dt * lap).tocsr()


def explicit_rhs(model, phi: np.ndarray, u: np.ndarray, dt: float, kphi: Optional[np.ndarray] = None) -> np.ndarray:
    ops = model.ops
    flux = model.tables.m(phi) * nonlocal_drift(model, phi, kphi) - u * phi
    return phi + dt * ops.divergence(flux)


def _solve_cg(model, mat: sp.csr_matrix, b: np.ndarray, x0: np.ndarray):
    iters = 0

    def count(_):
        nonlocal iters
        iters += 1

    jacobi = sp.diags(1.0 / mat.diagonal())
    x, info = spla.cg(mat, b, x0=x0, rtol=model.tolerances.cg_tol, maxiter=model.solver.cg_max_iters,
                      M=jacobi, callback=count)
    if info != 0:
        res = float(np.linalg.norm(b - mat @ x) / max(np.linalg.norm(b), 1e-300))
        raise NumericalError(f"CG did not converge in {iters} iterations (relative residual {res:.3e})",
                             residual=res)
    # exact solution has the mean of b; remove the iteration's drift
    x += (np.sum(b) - np.sum(x)) / x.size
    return x, iters


def ch_solve(model, phi: np.ndarray, u: np.ndarray, dt: float,
             method: Optional[Literal["cg", "direct"]] = None, kphi: Optional[np.ndarray] = None):
    """One step from (phi^n, u^n); returns (phi^{n+1}, linear iterations)."""
    if dt <= 0:
        raise NumericalError(f"Time step must be positive, got {dt}")
    method = method or model.solver.method
    mat = step_matrix(model, phi, dt)
    b = explicit_rhs(model, phi, u, dt, kphi).ravel()
    if method == "direct":
        x = spla.splu(mat.tocsc()).solve(b)
        iters = 1
    else:
        x, iters = _solve_cg(model, mat, b, phi.ravel())
    out = x.reshape(model.grid.shape)
    if not np.all(np.isfinite(out)):
        raise NumericalError("Non-finite phase field after Cahn-Hilliard step")
    logger.debug("CH step (%s): %d iterations", method, iters)
    return out, iters


def ch_step(state, dt: float, model, method: Optional[Literal["cg", "direct"]] = None) -> np.ndarray:
    """phi^{n+1} from the state's phase field and the velocity stored with it."""
    phi, _ = ch_solve(model, state.phi, state.u, dt, method)
    return phi
