"""Backward adjoint sweep, the exact Euclidean transpose of the tangent sweep.

Given sources rho^n (paired with psi^n, n = 0..N) and sigma^n (paired with
w^n, n = 0..N-1), `reverse` returns xi^n and y^n such that

    sum_n rho^n . psi^n + sigma^n . w^n = xi^0 . psi^0 + sum_n y^n . dU^n

for every tangent solution. Step n, from xi^{n+1}:

    z     = M^{-1} xi^{n+1}
    y^n   = S (sigma^n + dt phi grad z)
    xi^n  = z + dt [ u.grad z - m' V.grad z - m grad a.grad z + J*(G^T (m grad z)) + c' P^T z ]
            + R'^T y^n + rho^n
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from app.errors import ConfigError, NumericalError, StateError
from app.solver.brinkman import korteweg_rhs_transpose
from app.solver.trajectory import Trajectory
from .linearization import StepLinearization

logger = logging.getLogger(__name__)


@dataclass
class AdjointState:
    xi: np.ndarray
    v: np.ndarray


@dataclass
class AdjointSeries:
    xi: np.ndarray    # (N+1, nx, ny)
    y: np.ndarray     # (N, 2, nx, ny), Euclidean adjoint of the control
    dt: float

    @property
    def v(self) -> np.ndarray:
        """Adjoint velocity, the L2(0,T;L2) representative y / dt."""
        return self.y / self.dt

    def state(self, n: int) -> AdjointState:
        v = self.v[n] if n < self.y.shape[0] else np.zeros_like(self.y[0])
        return AdjointState(xi=self.xi[n], v=v)


def adjoint_step(xi_next: np.ndarray, traj: Trajectory, n: int, rho: np.ndarray, sigma: np.ndarray, model,
                 lin: Optional[StepLinearization] = None):
    """(xi^n, y^n) from xi^{n+1}."""
    lin = lin or StepLinearization.at(model, traj, n)
    dt = traj.dt
    ops = model.ops
    grid = model.grid

    z = lin.solve(xi_next)
    gz = ops.gradient(z)
    y, _, _ = model.brinkman.solve(sigma + dt * lin.phi * gz, check_div=False)

    terms = np.sum(lin.u * gz, axis=0)
    terms -= lin.dm * np.sum(lin.drift * gz, axis=0)
    terms -= lin.m * np.sum(model.grad_a * gz, axis=0)
    terms += model.kernel.convolve((ops.grad.T @ (lin.m * gz).ravel()).reshape(grid.shape))
    terms += lin.dcoef * ops.coefficient_action_transpose(lin.phi_next, z)
    xi = z + dt * terms + korteweg_rhs_transpose(model, lin.phi, y, lin.kphi) + rho
    if not (np.all(np.isfinite(xi)) and np.all(np.isfinite(y))):
        raise NumericalError(f"Non-finite adjoint state at step {n}")
    return xi, y


def reverse(model, traj: Trajectory, rho: np.ndarray, sigma: np.ndarray) -> AdjointSeries:
    """Backward sweep with generic sources rho (N+1 scalars) and sigma (N vectors)."""
    grid = model.grid
    N = traj.n_steps
    rho = np.asarray(rho, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if rho.shape != (N + 1,) + grid.shape:
        raise ConfigError(f"Scalar adjoint source has shape {rho.shape}, expected {(N + 1,) + grid.shape}")
    if sigma.shape != (N, 2) + grid.shape:
        raise ConfigError(f"Vector adjoint source has shape {sigma.shape}, expected {(N, 2) + grid.shape}")
    xi = rho[N].copy()
    xis: List[np.ndarray] = [xi]
    ys: List[np.ndarray] = []
    for n in range(N - 1, -1, -1):
        xi, y = adjoint_step(xi, traj, n, rho[n], sigma[n], model)
        xis.append(xi)
        ys.append(y)
    xis.reverse()
    ys.reverse()
    logger.debug("Adjoint sweep over %d steps, |xi^0| = %.3e", N, grid.norm(xis[0]))
    return AdjointSeries(xi=np.stack(xis), y=np.stack(ys), dt=traj.dt)


def tracking_sources(traj: Trajectory, targets):
    """Sources of the tracking cost: dt (phi - phi_d), phi^N - phi_Omega and dt (u - u_d)."""
    N = traj.n_steps
    phi = traj.phi_series()
    u = traj.u_series()
    phi_d = np.asarray(targets.phi_d, dtype=float)
    u_d = np.asarray(targets.u_d, dtype=float)
    if phi_d.shape[0] != N + 1 or u_d.shape[0] != N:
        raise ConfigError(f"Targets have {phi_d.shape[0]} phase and {u_d.shape[0]} velocity entries, "
                          f"trajectory needs {N + 1} and {N}")
    rho = traj.dt * (phi - phi_d)
    # terminal slice exactly phi(T) - phi_Omega
    rho[N] = phi[N] - np.asarray(targets.phi_omega, dtype=float)
    sigma = traj.dt * (u - u_d)
    return rho, sigma


def adjoint_sweep(model, traj: Trajectory, targets) -> AdjointSeries:
    """Adjoint of the tracking cost; `targets` carries phi_d (N+1), u_d (N) and phi_omega."""
    if not traj.is_complete():
        raise StateError("Adjoint sweep needs a complete trajectory")
    rho, sigma = tracking_sources(traj, targets)
    return reverse(model, traj, rho, sigma)
