"""Frozen coefficients of one forward step, shared by the tangent and adjoint sweeps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse import linalg as spla

from app.solver.cahn_hilliard import nonlocal_drift, step_matrix
from app.solver.trajectory import Trajectory


@dataclass(eq=False)
class StepLinearization:
    phi: np.ndarray        # phi^n
    phi_next: np.ndarray   # phi^{n+1}
    u: np.ndarray          # u^n
    kphi: np.ndarray       # J*phi^n
    m: np.ndarray
    dm: np.ndarray
    drift: np.ndarray      # V = phi grad(a) - grad(J*phi)
    dcoef: np.ndarray      # c'(phi^n) = m' a + lambda'
    matrix: sp.csc_matrix  # I - dt L(c(phi^n)), symmetric
    lu: object

    @classmethod
    def at(cls, model, traj: Trajectory, n: int) -> "StepLinearization":
        phi = traj.phi(n)
        kphi = model.kernel.convolve(phi)
        tables = model.tables
        mat = step_matrix(model, phi, traj.dt).tocsc()
        return cls(
            phi=phi,
            phi_next=traj.phi(n + 1),
            u=traj.u(n),
            kphi=kphi,
            m=tables.m(phi),
            dm=tables.dm(phi),
            drift=nonlocal_drift(model, phi, kphi),
            dcoef=tables.coefficient_derivative(phi, model.a),
            matrix=mat,
            lu=spla.splu(mat),
        )

    def solve(self, b: np.ndarray) -> np.ndarray:
        return self.lu.solve(b.ravel()).reshape(self.phi.shape)

