"""Derivative checks: Taylor remainder of the reduced cost, the tangent/adjoint
dot-product identity and a sampled variational inequality at a computed optimum.

Reports share the CSV columns epsilon_or_seed, lhs, rhs, rel_err.
"""

from __future__ import annotations

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.ndimage import gaussian_filter

from app.run_config import RunConfig
from app.sensitivity.adjoint import adjoint_sweep, reverse
from app.sensitivity.residual import continuous_adjoint_residual
from app.sensitivity.tangent import tangent_run
from app.solver.forward import run_forward
from app.solver.model import PhysicsModel
from app.utils.patterns import control_series, initial_phase
from .cost import control_inner, control_norm
from .ocp import OcpProblem
from .targets import build_targets

logger = logging.getLogger(__name__)

CHECK_COLUMNS = ["epsilon_or_seed", "lhs", "rhs", "rel_err"]


class CheckRow(BaseModel):
    epsilon_or_seed: float
    lhs: float
    rhs: float
    rel_err: float

    def row(self) -> dict:
        return self.model_dump()


class TaylorReport(BaseModel):
    rows: List[CheckRow]
    remainders: List[float] = Field(description="|lhs - rhs| per epsilon")
    slope: Optional[float] = Field(default=None, description="log-log slope of the remainder, None if skipped")
    slope_range: Tuple[float, float] = (1.9, 2.1)

    @property
    def skipped(self) -> bool:
        return self.slope is None

    @property
    def passed(self) -> bool:
        if self.slope is None:
            return all(r.lhs == 0.0 and r.rhs == 0.0 for r in self.rows)
        lo, hi = self.slope_range
        return lo <= self.slope <= hi


class DotProductReport(BaseModel):
    rows: List[CheckRow]
    tolerance: float

    @property
    def max_rel_err(self) -> float:
        return max(r.rel_err for r in self.rows)

    @property
    def passed(self) -> bool:
        return self.max_rel_err <= self.tolerance


class VariationalInequalityReport(BaseModel):
    samples: int
    min_value: float = Field(description="min over samples of <U_bar + v, U - U_bar> / |U - U_bar|")
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.min_value >= -self.tolerance


def _rel_err(lhs: float, rhs: float) -> float:
    scale = max(abs(lhs), abs(rhs))
    return abs(lhs - rhs) / scale if scale > 0 else 0.0


def smooth_control_direction(problem: OcpProblem, seed: int, smoothing: float = 2.0) -> np.ndarray:
    """Seeded random control, smoothed in space, of unit L2(0,T;L2) norm."""
    rng = np.random.default_rng(seed)
    d = rng.standard_normal(problem.control_shape)
    d = gaussian_filter(d, sigma=(0.0, 0.0, smoothing, smoothing), mode="reflect")
    return d / control_norm(problem.model.grid, problem.dt, d)


def taylor_test(problem: OcpProblem, base: np.ndarray, direction: np.ndarray,
                epsilons: Sequence[float] = (1e-2, 1e-3, 1e-4, 1e-5),
                slope_range: Tuple[float, float] = (1.9, 2.1)) -> TaylorReport:
    """lhs = G(U + eps d) - G(U), rhs = eps <g, d>; the remainder must shrink like eps^2."""
    grid = problem.model.grid
    ev = problem.evaluate(base)
    try:
        g = problem.gradient(ev)
    finally:
        ev.close()
    slope_g = control_inner(grid, problem.dt, g, direction)

    rows: List[CheckRow] = []
    remainders: List[float] = []
    zero_direction = not np.any(direction)
    for eps in epsilons:
        if zero_direction:
            lhs = 0.0
        else:
            lhs = problem.cost(base + eps * direction) - ev.cost
        rhs = eps * slope_g
        rows.append(CheckRow(epsilon_or_seed=float(eps), lhs=lhs, rhs=rhs, rel_err=_rel_err(lhs, rhs)))
        remainders.append(abs(lhs - rhs))
        logger.info("Taylor eps=%.1e: dG=%.6e, eps<g,d>=%.6e, remainder=%.3e", eps, lhs, rhs, remainders[-1])

    slope = None
    if zero_direction:
        logger.info("Taylor test: zero direction, slope verdict skipped")
    elif min(remainders) <= 0.0:
        logger.warning("Taylor test: a remainder is exactly zero, slope verdict skipped")
    else:
        slope = float(np.polyfit(np.log(epsilons), np.log(remainders), 1)[0])
        logger.info("Taylor test slope %.3f (accepted range %s)", slope, slope_range)
    return TaylorReport(rows=rows, remainders=remainders, slope=slope, slope_range=tuple(slope_range))


def dot_product_test(problem: OcpProblem, base: np.ndarray, seeds: Sequence[int] = tuple(range(10)),
                     tolerance: float = 1e-10) -> DotProductReport:
    """<A(psi0, dU), (rho, sigma)> against <(psi0, dU), A*(rho, sigma)> in the Euclidean pairing."""
    model = problem.model
    grid = model.grid
    N = problem.n_steps
    fwd = run_forward(model, problem.phi0, N, problem.dt, forcing=base, keep_trajectory=True, method="direct")
    traj = fwd.trajectory
    rows: List[CheckRow] = []
    try:
        for seed in seeds:
            rng = np.random.default_rng(seed)
            dU = rng.standard_normal(problem.control_shape)
            psi0 = rng.standard_normal(grid.shape)
            rho = rng.standard_normal((N + 1,) + grid.shape)
            sigma = rng.standard_normal(problem.control_shape)

            tan = tangent_run(model, traj, dU, psi0)
            adj = reverse(model, traj, rho, sigma)
            lhs = float(np.sum(rho * tan.psi) + np.sum(sigma * tan.w))
            rhs = float(np.sum(adj.xi[0] * psi0) + np.sum(adj.y * dU))
            rows.append(CheckRow(epsilon_or_seed=float(seed), lhs=lhs, rhs=rhs, rel_err=_rel_err(lhs, rhs)))
            logger.info("Dot-product seed %d: rel err %.3e", seed, rows[-1].rel_err)
    finally:
        traj.close()
    return DotProductReport(rows=rows, tolerance=tolerance)


def variational_inequality_check(problem: OcpProblem, control: np.ndarray, gradient: np.ndarray,
                                 samples: int = 100, seed: int = 0,
                                 tolerance: Optional[float] = None) -> VariationalInequalityReport:
    """Sample admissible U and check <U_bar + v, U - U_bar> >= -tol |U - U_bar|.

    The default tolerance is the KKT residual at U_bar, the size of the
    stationarity defect the sampled pairing can expose.
    """
    grid = problem.model.grid
    rng = np.random.default_rng(seed)
    half_g = 0.5 * np.asarray(gradient, dtype=float)
    if tolerance is None:
        tolerance = max(problem.kkt_residual(control, gradient), 1e-14)
    worst = np.inf
    for _ in range(samples):
        U = problem.bounds.sample(rng, problem.n_steps)
        diff = U - control
        dist = control_norm(grid, problem.dt, diff)
        if dist == 0.0:
            continue
        worst = min(worst, control_inner(grid, problem.dt, half_g, diff) / dist)
    worst = float(worst) if np.isfinite(worst) else 0.0
    logger.info("Variational inequality over %d samples: min %.3e (tolerance %.3e)", samples, worst, tolerance)
    return VariationalInequalityReport(samples=samples, min_value=worst, tolerance=float(tolerance))


def adjoint_residual_study(cfg: RunConfig, levels: int = 2) -> List[dict]:
    """Continuum adjoint residual under (h, dt) -> (h/2, dt/2) refinement.

    Each level rebuilds the model, the initial field and the targets on its own
    grid; use a smooth initial pattern so the levels see the same data.
    """
    base_model = PhysicsModel.from_config(cfg)
    n0, dt0 = base_model.time_grid(cfg.time.T, cfg.time.dt)
    rows: List[dict] = []
    for k in range(levels):
        level_cfg = cfg.model_copy(deep=True)
        level_cfg.grid.nx = cfg.grid.nx * 2**k
        level_cfg.grid.ny = cfg.grid.ny * 2**k
        model = base_model if k == 0 else PhysicsModel.from_config(level_cfg)
        n_steps, dt = n0 * 2**k, dt0 / 2**k
        phi0 = initial_phase(level_cfg.initial, model.grid, level_cfg.seed)
        targets, _ = build_targets(level_cfg, model, phi0, n_steps, dt)
        U = control_series(level_cfg.forcing, model.grid, n_steps)
        fwd = run_forward(model, phi0, n_steps, dt, forcing=U, keep_trajectory=True, method="direct")
        try:
            adj = adjoint_sweep(model, fwd.trajectory, targets)
            report = continuous_adjoint_residual(model, fwd.trajectory, adj, targets)
        finally:
            fwd.trajectory.close()
        rows.append({"nx": model.grid.nx, "ny": model.grid.ny, "dt": dt, "printed": report.printed})
    rows[0]["order_printed"] = float("nan")
    for prev, cur in zip(rows, rows[1:]):
        cur["order_printed"] = float(np.log2(prev["printed"] / cur["printed"]))
    logger.info("Adjoint residual refinement: %s", ", ".join(f"{r['nx']}: {r['printed']:.3e}" for r in rows))
    return rows
