"""Tangent (linearized) sweep: exact derivative of the discrete forward map.

For a control perturbation dU and initial perturbation psi^0, step n computes

    w^n       = S (R'(phi^n) psi^n + dU^n)
    M psi^{n+1} = psi^n + dt div( m' psi^n V + m (psi^n grad a - grad J*psi^n) - w^n phi^n - u^n psi^n )
                + dt P(phi^{n+1}) (c' psi^n)

where S is the Brinkman solution operator, R' the derivative of the capillary
force, M = I - dt L(c(phi^n)) and P the derivative of L(c) phi^{n+1} in c.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from app.errors import ConfigError, NumericalError
from app.solver.brinkman import korteweg_rhs_derivative
from app.solver.trajectory import Trajectory
from .linearization import StepLinearization

logger = logging.getLogger(__name__)


@dataclass
class TangentState:
    psi: np.ndarray
    w: np.ndarray


@dataclass
class TangentSeries:
    psi: np.ndarray   # (N+1, nx, ny)
    w: np.ndarray     # (N, 2, nx, ny)


def tangent_step(psi: np.ndarray, traj: Trajectory, n: int, dU: np.ndarray, model,
                 lin: Optional[StepLinearization] = None) -> TangentState:
    """(psi^{n+1}, w^n) from psi^n and the control perturbation of step n."""
    grid = model.grid
    grid.check_vector(dU, "control perturbation")
    lin = lin or StepLinearization.at(model, traj, n)
    dt = traj.dt
    ops = model.ops

    kpsi = model.kernel.convolve(psi)
    rhs = korteweg_rhs_derivative(model, lin.phi, psi, lin.kphi, kpsi) + dU
    w, _, _ = model.brinkman.solve(rhs, check_div=False)

    d_drift = psi * model.grad_a - ops.gradient(kpsi)
    flux = lin.dm * psi * lin.drift + lin.m * d_drift - (w * lin.phi + lin.u * psi)
    b = psi + dt * ops.divergence(flux) + dt * ops.coefficient_action(lin.phi_next, lin.dcoef * psi)
    psi_next = lin.solve(b)
    if not (np.all(np.isfinite(psi_next)) and np.all(np.isfinite(w))):
        raise NumericalError(f"Non-finite tangent state at step {n}")
    return TangentState(psi=psi_next, w=w)


def tangent_run(model, traj: Trajectory, dU: np.ndarray, psi0: Optional[np.ndarray] = None) -> TangentSeries:
    """Propagate (psi0, dU) through the whole trajectory."""
    grid = model.grid
    dU = np.asarray(dU, dtype=float)
    if dU.shape != (traj.n_steps, 2, grid.nx, grid.ny):
        raise ConfigError(f"Control perturbation has shape {dU.shape}, expected "
                          f"{(traj.n_steps, 2, grid.nx, grid.ny)}")
    psi = np.zeros(grid.shape) if psi0 is None else np.array(psi0, dtype=float)
    psis: List[np.ndarray] = [psi]
    ws: List[np.ndarray] = []
    for n in range(traj.n_steps):
        st = tangent_step(psi, traj, n, dU[n], model)
        psi = st.psi
        psis.append(psi)
        ws.append(st.w)
    logger.debug("Tangent sweep over %d steps, |psi^N| = %.3e", traj.n_steps, grid.norm(psi))
    return TangentSeries(psi=np.stack(psis), w=np.stack(ws))
