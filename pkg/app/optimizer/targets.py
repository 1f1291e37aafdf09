"""Tracking targets from a run configuration: an inverse-crime forward run or CHBF files."""

from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np

from app.run_config import RunConfig
from app.solver.forward import run_forward
from app.storage.chbf import read_field, read_series
from app.utils.patterns import control_series
from .cost import TrackingTargets

logger = logging.getLogger(__name__)


def build_targets(cfg: RunConfig, model, phi0: np.ndarray, n_steps: int,
                  dt: float) -> Tuple[TrackingTargets, Optional[np.ndarray]]:
    """Targets and, for inverse-crime targets, the control that generated them."""
    grid = model.grid
    section = cfg.targets
    if section.kind == "files":
        targets = TrackingTargets(
            phi_d=read_series(section.phi_d, "phi", grid),
            u_d=read_series(section.u_d, "u", grid, vector=True),
            phi_omega=read_field(section.phi_omega, grid),
        )
        targets.check(grid, n_steps)
        logger.info("Targets loaded from %s, %s and %s", section.phi_d, section.u_d, section.phi_omega)
        return targets, None

    U_true = control_series(section.control, grid, n_steps)
    fwd = run_forward(model, phi0, n_steps, dt, forcing=U_true, keep_trajectory=True, method="direct")
    traj = fwd.trajectory
    try:
        targets = TrackingTargets.from_series(traj.phi_series(), traj.u_series())
    finally:
        traj.close()
    logger.info("Inverse-crime targets from a '%s' control over %d steps", section.control.pattern, n_steps)
    return targets, U_true
