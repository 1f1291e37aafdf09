"""Time stepping of the coupled system: mu -> Brinkman -> Cahn-Hilliard per step."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Literal, Optional, Union

import numpy as np

from app.errors import ConfigError, NumericalError
from .brinkman import korteweg_rhs
from .cahn_hilliard import ch_solve, chemical_potential
from .state import EnergyReport, SolverState, StepStats
from .trajectory import Trajectory

logger = logging.getLogger(__name__)

Forcing = Union[None, np.ndarray, Callable[[int, float], np.ndarray]]
StepCallback = Callable[[int, SolverState, EnergyReport, StepStats], None]


def initial_state(model, phi0: np.ndarray, t0: float = 0.0) -> SolverState:
    grid = model.grid
    phi0 = np.array(grid.check_scalar(phi0, "initial phase field"), dtype=float)
    if not np.all(np.isfinite(phi0)):
        raise ConfigError("Initial phase field has non-finite values")
    return SolverState(t=t0, phi=phi0, u=np.zeros((2,) + grid.shape), mu=chemical_potential(phi0, model),
                       pi=np.zeros(grid.shape), step=0)


def forcing_at(forcing: Forcing, n: int, t: float, grid) -> np.ndarray:
    """Body force of step n from a constant field, a (N, 2, nx, ny) series or a callable."""
    if forcing is None:
        return np.zeros((2,) + grid.shape)
    if callable(forcing):
        return grid.check_vector(np.asarray(forcing(n, t), dtype=float), "forcing")
    forcing = np.asarray(forcing, dtype=float)
    if forcing.ndim == 3:
        return grid.check_vector(forcing, "forcing")
    if forcing.ndim == 4:
        if n >= forcing.shape[0]:
            raise ConfigError(f"Forcing series has {forcing.shape[0]} entries, step {n} requested")
        return grid.check_vector(forcing[n], "forcing")
    raise ConfigError(f"Forcing of shape {forcing.shape} is neither a field nor a time series")


def advance(state: SolverState, dt: float, model, force: Optional[np.ndarray] = None,
            method: Optional[Literal["cg", "direct"]] = None, stats: Optional[StepStats] = None,
            check_div: bool = True) -> SolverState:
    """chemical_potential -> brinkman_solve -> ch_step, returning the state at t + dt."""
    grid = model.grid
    phi = state.phi
    kphi = model.kernel.convolve(phi)
    mu = chemical_potential(phi, model, kphi)
    rhs = korteweg_rhs(model, phi, kphi)
    if force is not None:
        rhs = rhs + grid.check_vector(force, "forcing")
    u, pi, stokes_iters = model.brinkman.solve(rhs, check_div=check_div)
    phi_new, cg_iters = ch_solve(model, phi, u, dt, method, kphi)
    if stats is not None:
        stats.cg_iters = cg_iters
        stats.stokes_iters = stokes_iters
        stats.div_u_max = float(np.max(np.abs(model.ops.divergence(u))))
    return SolverState(t=state.t + dt, phi=phi_new, u=u, mu=mu, pi=pi, step=state.step + 1)


def energy(state: SolverState, model) -> EnergyReport:
    grid = model.grid
    w = grid.cell_area
    phi = state.phi
    kphi = model.kernel.convolve(phi)
    bulk = float(np.sum(model.tables.potential(phi)) * w)
    nonlocal_part = 0.5 * float(np.sum(phi * kphi) * w)
    e = bulk - nonlocal_part
    free = e + 0.5 * float(np.sum(model.a * phi * phi) * w)

    ops = model.ops
    gmu = ops.gradient(state.mu)
    diss_mu = float(np.sum(model.tables.m(phi) * np.sum(gmu * gmu, axis=0)) * w)
    u_flat = state.u.reshape(2, -1)
    lap = ops.dirichlet_laplacian
    diss_visc = model.nu * float(sum(u_flat[k] @ (-(lap @ u_flat[k])) for k in range(2)) * w)
    diss_perm = float(np.sum(model.eta * np.sum(state.u * state.u, axis=0)) * w)
    return EnergyReport(t=state.t, mass=grid.integrate(phi), energy=e, free_energy=free, diss_mu=diss_mu,
                        diss_visc=diss_visc, diss_perm=diss_perm, max_abs_phi=float(np.max(np.abs(phi))))


@dataclass
class ForwardResult:
    final: SolverState
    dt: float
    n_steps: int
    reports: List[EnergyReport] = field(default_factory=list)
    stats: List[StepStats] = field(default_factory=list)
    trajectory: Optional[Trajectory] = None


def run_forward(model, phi0: np.ndarray, n_steps: int, dt: float, forcing: Forcing = None,
                keep_trajectory: bool = False, method: Optional[Literal["cg", "direct"]] = None,
                on_step: Optional[StepCallback] = None, check_phase_bound: bool = True) -> ForwardResult:
    """Run N steps from phi0; reports[0] describes the initial state."""
    if n_steps < 1 or dt <= 0:
        raise ConfigError(f"Need n_steps >= 1 and dt > 0, got {n_steps}, {dt}")
    grid = model.grid
    state = initial_state(model, phi0)
    mass0 = grid.integrate(state.phi)
    bound = 1.0 + model.tolerances.phase_bound_slack
    traj = None
    if keep_trajectory:
        traj = Trajectory(grid, dt, n_steps, memory_limit_mb=model.solver.memory_limit_mb)
        traj.store("phi", 0, state.phi)

    result = ForwardResult(final=state, dt=dt, n_steps=n_steps, trajectory=traj)
    report0 = energy(state, model)
    result.reports.append(report0)
    result.stats.append(StepStats())
    if on_step is not None:
        on_step(0, state, report0, result.stats[0])

    logger.info("Forward run: %d steps of dt=%.4g on %dx%d", n_steps, dt, grid.nx, grid.ny)
    warned_bound = warned_cfl = False
    for n in range(n_steps):
        stats = StepStats()
        force = forcing_at(forcing, n, state.t, grid)
        state = advance(state, dt, model, force, method, stats)
        report = energy(state, model)

        if traj is not None:
            traj.store("u", n, state.u)
            traj.store("mu", n, state.mu)
            traj.store("phi", n + 1, state.phi)

        umax = float(np.max(np.abs(state.u)))
        if not warned_cfl and umax * dt > grid.h_min:
            logger.warning("CFL number %.2f exceeds 1 at step %d", umax * dt / grid.h_min, n + 1)
            warned_cfl = True
        if check_phase_bound:
            if report.max_abs_phi > bound:
                raise NumericalError(f"max|phi| = {report.max_abs_phi:.4f} exceeds {bound:.2f} at step {n + 1}",
                                     residual=report.max_abs_phi)
            if not warned_bound and report.max_abs_phi > 1.0:
                logger.warning("Phase field left [-1, 1] at step %d (max|phi| = %.4f)", n + 1, report.max_abs_phi)
                warned_bound = True

        result.reports.append(report)
        result.stats.append(stats)
        logger.debug("step %d t=%.4g E=%.8g div=%.2e cg=%d", n + 1, state.t, report.energy,
                     stats.div_u_max, stats.cg_iters)
        if on_step is not None:
            on_step(n + 1, state, report, stats)

    result.final = state
    drift = abs(grid.integrate(state.phi) - mass0)
    logger.info("Forward run done: t=%.4g, E=%.8g, mass drift %.2e", state.t, result.reports[-1].energy, drift)
    return result
