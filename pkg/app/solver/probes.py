"""Numerical studies of the forward solver.

- Manufactured Brinkman solution on a sequence of grids (spatial order).
- Continuous-dependence probe: perturb phi0 by eps and track the state difference.
- Step doubling and temporal self-convergence of the time stepper.
"""

from __future__ import annotations

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import ndimage

from app.fields.grid import Grid2D
from .brinkman import BrinkmanSolver
from .forward import Forcing, advance, forcing_at, initial_state, run_forward

logger = logging.getLogger(__name__)


# ---- manufactured Brinkman solution ------------------------------------------

def _stream_profile(z: np.ndarray, k: float):
    """S = sin^3(kz) and its first three derivatives."""
    s, c = np.sin(k * z), np.cos(k * z)
    return (s**3, 3 * k * s * s * c, 3 * k**2 * s * (2 - 3 * s * s), 3 * k**3 * c * (2 - 9 * s * s))


def brinkman_manufactured(grid: Grid2D, nu: float = 1.0, eta: float = 1.0):
    """Exact (u, pi) and the body force producing them.

    u is the curl of sin^3(k x) sin^3(k y), which vanishes to third order at the
    walls of the unit-period box; pi = cos(k x) cos(k y).
    """
    kx, ky = np.pi / grid.lx, np.pi / grid.ly
    x, y = grid.centers()
    sx, dsx, d2sx, d3sx = _stream_profile(x, kx)
    sy, dsy, d2sy, d3sy = _stream_profile(y, ky)
    u = np.stack([sx * dsy, -dsx * sy])
    lap_u = np.stack([d2sx * dsy + sx * d3sy, -(d3sx * sy + dsx * d2sy)])
    pi = np.cos(kx * x) * np.cos(ky * y)
    grad_pi = np.stack([-kx * np.sin(kx * x) * np.cos(ky * y), -ky * np.cos(kx * x) * np.sin(ky * y)])
    force = -nu * lap_u + eta * u + grad_pi
    return u, pi, force


def brinkman_mms_error(n: int, nu: float = 1.0, eta: float = 1.0) -> Dict[str, float]:
    grid = Grid2D(n, n)
    u_exact, _, force = brinkman_manufactured(grid, nu, eta)
    u, _, _ = BrinkmanSolver(grid, nu, eta).solve(force)
    err = grid.norm(np.sqrt(np.sum((u - u_exact) ** 2, axis=0)))
    return {"n": n, "h": grid.hx, "u_error": err}


def brinkman_mms_study(sizes: Sequence[int] = (32, 64, 128), nu: float = 1.0, eta: float = 1.0) -> List[Dict[str, float]]:
    """Velocity L2 errors and observed orders between consecutive grids."""
    rows = [brinkman_mms_error(n, nu, eta) for n in sizes]
    rows[0]["order"] = float("nan")
    for prev, cur in zip(rows, rows[1:]):
        cur["order"] = float(np.log(prev["u_error"] / cur["u_error"]) / np.log(prev["h"] / cur["h"]))
    for r in rows:
        logger.info("Brinkman MMS n=%d error=%.3e order=%.3f", r["n"], r["u_error"], r["order"])
    return rows


# ---- continuous dependence ---------------------------------------------------

def smooth_direction(grid: Grid2D, seed: int, smoothing: float = 2.0) -> np.ndarray:
    """Mean-zero smoothed noise of unit L2 norm."""
    rng = np.random.default_rng(seed)
    d = ndimage.gaussian_filter(rng.standard_normal(grid.shape), smoothing, mode="reflect")
    d -= d.mean()
    return d / grid.norm(d)


def _h1_norm_sq(model, u: np.ndarray) -> float:
    lap = model.ops.dirichlet_laplacian
    w = model.grid.cell_area
    flat = u.reshape(2, -1)
    return float(sum(flat[k] @ flat[k] + flat[k] @ (-(lap @ flat[k])) for k in range(2)) * w)


def stability_probe(model, phi0: np.ndarray, n_steps: int, dt: float, forcing: Forcing = None,
                    epsilons: Sequence[float] = (1e-2, 1e-3, 1e-4), seed: int = 0) -> Dict[str, object]:
    """Difference of two runs started from phi0 and phi0 + eps d.

    Reports sup_n |delta phi^n|_H and (sum dt |delta u^n|_V^2)^(1/2) per eps and
    the log-log slope of each against eps (1 for Lipschitz dependence).
    """
    grid = model.grid
    direction = smooth_direction(grid, seed)
    base = run_forward(model, phi0, n_steps, dt, forcing, keep_trajectory=True, method="direct",
                       check_phase_bound=False)
    traj = base.trajectory
    rows = []
    try:
        for eps in epsilons:
            state = initial_state(model, phi0 + eps * direction)
            sup_h = grid.norm(state.phi - traj.phi(0))
            u_sq = 0.0
            for n in range(n_steps):
                state = advance(state, dt, model, forcing_at(forcing, n, state.t, grid), method="direct")
                sup_h = max(sup_h, grid.norm(state.phi - traj.phi(n + 1)))
                u_sq += dt * _h1_norm_sq(model, state.u - traj.u(n))
            rows.append({"epsilon": float(eps), "sup_phi_H": sup_h, "u_L2V": float(np.sqrt(u_sq)),
                         "ratio": sup_h / eps})
            logger.info("Stability probe eps=%.1e: sup|dphi|=%.3e, |du|=%.3e", eps, sup_h, np.sqrt(u_sq))
    finally:
        traj.close()
    log_eps = np.log([r["epsilon"] for r in rows])
    slopes = {key: float(np.polyfit(log_eps, np.log([r[col] for r in rows]), 1)[0])
              for key, col in (("slope_phi", "sup_phi_H"), ("slope_u", "u_L2V"))}
    logger.info("Stability slopes: phi %.3f, u %.3f", slopes["slope_phi"], slopes["slope_u"])
    return {"rows": rows, **slopes}


# ---- time stepping -----------------------------------------------------------

def step_doubling_difference(model, phi0: np.ndarray, dt: float, force: Optional[np.ndarray] = None) -> float:
    """|one step of dt - two steps of dt/2|_H from phi0."""
    s0 = initial_state(model, phi0)
    one = advance(s0, dt, model, force, method="direct")
    half = advance(advance(s0, 0.5 * dt, model, force, method="direct"), 0.5 * dt, model, force, method="direct")
    return model.grid.norm(one.phi - half.phi)


def temporal_convergence(model, phi0: np.ndarray, T: float, n_base: int, levels: int = 3,
                         forcing: Optional[np.ndarray] = None) -> List[Dict[str, float]]:
    """Errors at T against a run with 2**levels times more steps; forcing must be time-independent."""
    ref = run_forward(model, phi0, n_base * 2**levels, T / (n_base * 2**levels), forcing, method="direct",
                      check_phase_bound=False).final.phi
    rows = []
    for k in range(levels):
        n = n_base * 2**k
        phi = run_forward(model, phi0, n, T / n, forcing, method="direct", check_phase_bound=False).final.phi
        rows.append({"n_steps": n, "dt": T / n, "error": model.grid.norm(phi - ref)})
    rows[0]["order"] = float("nan")
    for prev, cur in zip(rows, rows[1:]):
        cur["order"] = float(np.log2(prev["error"] / cur["error"]))
    return rows
