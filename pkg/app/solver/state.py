"""Solver state and per-step diagnostic records."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict

import numpy as np
from pydantic import BaseModel, Field


@dataclass
class SolverState:
    """(phi, u, mu, pi) at time t.

    After `advance`, `phi` is the new phase field while `u`, `mu` and `pi` are the
    velocity, chemical potential and pressure that produced it.
    """

    t: float
    phi: np.ndarray
    u: np.ndarray
    mu: np.ndarray
    pi: np.ndarray
    step: int = 0

    def copy(self) -> "SolverState":
        return replace(self, phi=self.phi.copy(), u=self.u.copy(), mu=self.mu.copy(), pi=self.pi.copy())


@dataclass
class StepStats:
    cg_iters: int = 0
    stokes_iters: int = 0
    div_u_max: float = 0.0


class EnergyReport(BaseModel):
    t: float = Field(description="Time of the phase field")
    mass: float = Field(description="Integral of phi")
    energy: float = Field(description="sum F_delta(phi) - 1/2 sum phi (J*phi)")
    free_energy: float = Field(description="energy + 1/2 sum a phi^2, the decaying functional")
    diss_mu: float = Field(description="sum m(phi) |grad mu|^2")
    diss_visc: float = Field(description="nu sum |grad u|^2")
    diss_perm: float = Field(description="sum eta |u|^2")
    max_abs_phi: float

    def row(self, stats: StepStats) -> Dict[str, float]:
        """Diagnostics CSV row."""
        return {
            "t": self.t,
            "mass": self.mass,
            "energy": self.energy,
            "free_energy": self.free_energy,
            "diss_mu": self.diss_mu,
            "diss_visc": self.diss_visc,
            "diss_perm": self.diss_perm,
            "max_abs_phi": self.max_abs_phi,
            "div_u_max": stats.div_u_max,
            "cg_iters": stats.cg_iters,
            "stokes_iters": stats.stokes_iters,
        }


DIAGNOSTIC_COLUMNS = [
    "t", "mass", "energy", "free_energy", "diss_mu", "diss_visc", "diss_perm",
    "max_abs_phi", "div_u_max", "cg_iters", "stokes_iters",
]
