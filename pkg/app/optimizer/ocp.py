"""Projected gradient descent with Armijo backtracking on the reduced cost.

One iteration:
    g      = 2 (U + v)                        reduced gradient in L2(0,T;L2)
    U(s)   = P(U - s g),  s = s0, s0 b, s0 b^2, ...
    accept J(U(s)) <= J(U) - c <g, U - U(s)>
Stops once |U - P(U - g)| <= kkt_tol * (initial value).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Literal, Optional

import numpy as np

from app.errors import ConfigError, NumericalError
from app.run_config import OptimizerSection
from app.sensitivity.adjoint import AdjointSeries, adjoint_sweep
from app.solver.forward import ForwardResult, run_forward
from .cost import CostBreakdown, TrackingTargets, control_inner, control_norm, cost_terms
from .projection import Bounds

logger = logging.getLogger(__name__)

ITERATE_COLUMNS = ["iter", "cost", "kkt_residual", "step_size", "backtracks", "grad_norm"]

Status = Literal["converged", "max_iters", "line_search_failed"]


@dataclass(eq=False)
class Evaluation:
    """Cost of one control together with the forward run that produced it."""
    control: np.ndarray
    breakdown: CostBreakdown
    forward: ForwardResult

    @property
    def cost(self) -> float:
        return self.breakdown.total

    def close(self) -> None:
        if self.forward.trajectory is not None:
            self.forward.trajectory.close()


@dataclass(eq=False)
class ControlIterate:
    iteration: int
    control: np.ndarray
    cost: float
    kkt_residual: float
    step_size: float
    backtracks: int
    grad_norm: float

    def row(self) -> dict:
        return {"iter": self.iteration, "cost": self.cost, "kkt_residual": self.kkt_residual,
                "step_size": self.step_size, "backtracks": self.backtracks, "grad_norm": self.grad_norm}


@dataclass(eq=False)
class OcpProblem:
    model: object
    phi0: np.ndarray
    n_steps: int
    dt: float
    targets: TrackingTargets
    bounds: Bounds
    options: OptimizerSection = field(default_factory=OptimizerSection)
    kkt_tol: float = 1e-5

    def __post_init__(self):
        self.targets.check(self.model.grid, self.n_steps)
        if self.bounds.lower.shape != (2,) + self.model.grid.shape:
            raise ConfigError("Bounds do not live on the model grid")

    @property
    def control_shape(self) -> tuple:
        return (self.n_steps, 2) + self.model.grid.shape

    def evaluate(self, U: np.ndarray) -> Evaluation:
        """Forward solve with the exact step factorizations, keeping the trajectory."""
        U = np.asarray(U, dtype=float)
        if U.shape != self.control_shape:
            raise ConfigError(f"Control has shape {U.shape}, expected {self.control_shape}")
        fwd = run_forward(self.model, self.phi0, self.n_steps, self.dt, forcing=U, keep_trajectory=True,
                          method="direct")
        traj = fwd.trajectory
        breakdown = cost_terms(self.model.grid, self.dt, traj.phi_series(), traj.u_series(), U, self.targets)
        return Evaluation(control=U, breakdown=breakdown, forward=fwd)

    def cost(self, U: np.ndarray) -> float:
        ev = self.evaluate(U)
        ev.close()
        return ev.cost

    def adjoint(self, ev: Evaluation) -> AdjointSeries:
        return adjoint_sweep(self.model, ev.forward.trajectory, self.targets)

    def gradient(self, ev: Evaluation, adjoint: Optional[AdjointSeries] = None) -> np.ndarray:
        return reduced_gradient(ev.control, (adjoint or self.adjoint(ev)).v)

    def kkt_residual(self, U: np.ndarray, g: np.ndarray) -> float:
        return control_norm(self.model.grid, self.dt, U - self.bounds.project(U - g))


def reduced_gradient(U: np.ndarray, v: np.ndarray) -> np.ndarray:
    """g = 2 (U + v), the L2(0,T;L2) gradient of the cost without 1/2 factors."""
    U = np.asarray(U, dtype=float)
    v = np.asarray(v, dtype=float)
    if U.shape != v.shape:
        raise ConfigError(f"Control {U.shape} and adjoint velocity {v.shape} differ in shape")
    return 2.0 * (U + v)


@dataclass(eq=False)
class OcpResult:
    iterates: List[ControlIterate]
    status: Status
    final: Evaluation
    adjoint: AdjointSeries
    gradient: np.ndarray
    initial_kkt: float

    @property
    def control(self) -> np.ndarray:
        return self.final.control

    @property
    def kkt_residual(self) -> float:
        return self.iterates[-1].kkt_residual

    @property
    def converged(self) -> bool:
        return self.status == "converged"


IterateCallback = Callable[[ControlIterate], None]


def _line_search(problem: OcpProblem, ev: Evaluation, g: np.ndarray):
    """First step size meeting the Armijo condition, or None after max_backtracks."""
    opts = problem.options
    grid = problem.model.grid
    U = ev.control
    s = opts.initial_step
    for k in range(opts.max_backtracks + 1):
        trial = problem.bounds.project(U - s * g)
        decrease = control_inner(grid, problem.dt, g, U - trial)
        try:
            cand = problem.evaluate(trial)
        except NumericalError as e:
            logger.debug("Trial step %.3e failed in the forward solve: %s", s, e)
        else:
            if cand.cost <= ev.cost - opts.armijo_c * decrease:
                return cand, s, k
            cand.close()
        s *= opts.backtrack_factor
    return None


def solve_ocp(problem: OcpProblem, initial_control: Optional[np.ndarray] = None,
              on_iterate: Optional[IterateCallback] = None) -> OcpResult:
    """Minimize the tracking cost over the admissible box; the initial control is projected first."""
    opts = problem.options
    grid = problem.model.grid
    U0 = np.zeros(problem.control_shape) if initial_control is None else np.asarray(initial_control, dtype=float)
    if U0.shape != problem.control_shape:
        raise ConfigError(f"Initial control has shape {U0.shape}, expected {problem.control_shape}")
    U0 = problem.bounds.project(U0)

    ev = problem.evaluate(U0)
    adj = problem.adjoint(ev)
    g = problem.gradient(ev, adj)
    kkt0 = problem.kkt_residual(ev.control, g)
    it = ControlIterate(0, ev.control, ev.cost, kkt0, 0.0, 0, control_norm(grid, problem.dt, g))
    iterates = [it]
    if on_iterate is not None:
        on_iterate(it)
    logger.info("OCP start: J=%.8e (tracking %.4e, control %.4e), KKT=%.3e",
                ev.cost, ev.breakdown.tracking, ev.breakdown.control, kkt0)

    status: Status = "max_iters"
    if kkt0 == 0.0 or problem.bounds.degenerate:
        status = "converged"
    for k in range(1, opts.max_iters + 1):
        if status == "converged" or it.kkt_residual <= problem.kkt_tol * kkt0:
            status = "converged"
            break
        found = _line_search(problem, ev, g)
        if found is None:
            logger.warning("Line search failed after %d backtracks at iteration %d; keeping the last iterate",
                           opts.max_backtracks, k)
            status = "line_search_failed"
            break
        cand, step, backtracks = found
        ev.close()
        ev = cand
        adj = problem.adjoint(ev)
        g = problem.gradient(ev, adj)
        it = ControlIterate(k, ev.control, ev.cost, problem.kkt_residual(ev.control, g), step, backtracks,
                            control_norm(grid, problem.dt, g))
        iterates.append(it)
        if on_iterate is not None:
            on_iterate(it)
        logger.info("OCP iter %d: J=%.8e KKT=%.3e step=%.3g backtracks=%d", k, it.cost, it.kkt_residual,
                    step, backtracks)
    else:
        if it.kkt_residual <= problem.kkt_tol * kkt0:
            status = "converged"

    logger.info("OCP %s after %d iterations: J=%.8e, KKT=%.3e (relative %.3e)", status, it.iteration,
                it.cost, it.kkt_residual, it.kkt_residual / kkt0 if kkt0 > 0 else 0.0)
    return OcpResult(iterates=iterates, status=status, final=ev, adjoint=adj, gradient=g, initial_kkt=kkt0)
