"""Tracking-type cost of a control and the targets it is measured against.

    J = int_0^T |phi - phi_d|^2 + int_0^T |u - u_d|^2 + |phi(T) - phi_Omega|^2 + int_0^T |U|^2

without 1/2 factors. Time integrals use the left rectangle rule: phi at t_0..t_{N-1},
u and U on the step intervals 0..N-1; space integrals are cell sums.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel

from app.errors import ConfigError
from app.fields.grid import Grid2D

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class TrackingTargets:
    phi_d: np.ndarray      # (N+1, nx, ny); the last entry is not used by the running term
    u_d: np.ndarray        # (N, 2, nx, ny)
    phi_omega: np.ndarray  # (nx, ny)

    def __post_init__(self):
        self.phi_d = np.asarray(self.phi_d, dtype=float)
        self.u_d = np.asarray(self.u_d, dtype=float)
        self.phi_omega = np.asarray(self.phi_omega, dtype=float)
        if self.phi_d.ndim != 3 or self.u_d.ndim != 4:
            raise ConfigError(f"Targets must be series, got phi_d {self.phi_d.shape} and u_d {self.u_d.shape}")
        if self.phi_d.shape[0] != self.u_d.shape[0] + 1:
            raise ConfigError(f"phi_d has {self.phi_d.shape[0]} entries, u_d {self.u_d.shape[0]}; "
                              "expected N+1 and N")

    @property
    def n_steps(self) -> int:
        return self.u_d.shape[0]

    def check(self, grid: Grid2D, n_steps: int) -> None:
        if self.n_steps != n_steps:
            raise ConfigError(f"Targets cover {self.n_steps} steps, run has {n_steps}")
        if self.phi_d.shape[1:] != grid.shape or self.u_d.shape[1:] != (2,) + grid.shape:
            raise ConfigError(f"Targets do not live on the {grid.nx}x{grid.ny} grid")
        grid.check_scalar(self.phi_omega, "phi_Omega")

    @classmethod
    def from_series(cls, phi: np.ndarray, u: np.ndarray) -> "TrackingTargets":
        """Targets met exactly by the given trajectory."""
        phi = np.array(phi, dtype=float)
        return cls(phi_d=phi, u_d=np.array(u, dtype=float), phi_omega=phi[-1].copy())


class CostBreakdown(BaseModel):
    phase: float
    velocity: float
    terminal: float
    control: float

    @property
    def tracking(self) -> float:
        return self.phase + self.velocity + self.terminal

    @property
    def total(self) -> float:
        return self.tracking + self.control


def cost_terms(grid: Grid2D, dt: float, phi: np.ndarray, u: np.ndarray, U: np.ndarray,
               targets: TrackingTargets) -> CostBreakdown:
    phi = np.asarray(phi, dtype=float)
    u = np.asarray(u, dtype=float)
    U = np.asarray(U, dtype=float)
    N = targets.n_steps
    if phi.shape != targets.phi_d.shape:
        raise ConfigError(f"Phase series has shape {phi.shape}, targets {targets.phi_d.shape}")
    if u.shape != targets.u_d.shape or U.shape != targets.u_d.shape:
        raise ConfigError(f"Velocity {u.shape} and control {U.shape} must match targets {targets.u_d.shape}")
    w = grid.cell_area
    dphi = phi[:N] - targets.phi_d[:N]
    du = u - targets.u_d
    dT = phi[N] - targets.phi_omega
    return CostBreakdown(
        phase=float(dt * w * np.sum(dphi * dphi)),
        velocity=float(dt * w * np.sum(du * du)),
        terminal=float(w * np.sum(dT * dT)),
        control=float(dt * w * np.sum(U * U)),
    )


def cost(grid: Grid2D, dt: float, phi: np.ndarray, u: np.ndarray, U: np.ndarray,
         targets: TrackingTargets) -> float:
    return cost_terms(grid, dt, phi, u, U, targets).total


def control_inner(grid: Grid2D, dt: float, U: np.ndarray, V: np.ndarray) -> float:
    """L2(0,T;L2) pairing of two space-time controls."""
    return float(dt * grid.cell_area * np.sum(U * V))


def control_norm(grid: Grid2D, dt: float, U: np.ndarray) -> float:
    return float(np.sqrt(max(control_inner(grid, dt, U, U), 0.0)))
