"""Continuum residual of the discrete adjoint solution.

Evaluates, at every step n with phi^n, u^n, v^n,

    r = (xi^n - xi^{n+1})/dt - u.grad z + m' V.grad z - Jg(m grad z) - c Lap z
        + V.v - Jg(phi v) - (phi - phi_d)

where V = phi grad a - grad J*phi, c = m a + lambda, Jg(g) = int grad_y J(x-y).g(y) dy
and z = (I - dt L)^{-1} xi^{n+1} is the implicit stage of the backward step.
Expanding the discrete div(c grad z) gives c Lap z + (c' grad phi + m grad a).grad z;
the m grad a part cancels the transport the explicit drift contributes, so the
discrete transpose and this form agree up to O(h^2 + dt) in the interior.

Norms are discrete L2 over the interior at distance >= 1/8 of the domain from
the walls (at least two cells). The mirrored ghost makes the gradient of
non-Neumann fields such as a and J*phi inexact in the wall cells, and a fixed
physical margin keeps that layer out under refinement.
"""

from __future__ import annotations

import logging
from typing import Dict, List

import numpy as np
from pydantic import BaseModel, Field

from app.errors import ConfigError
from app.solver.trajectory import Trajectory
from .adjoint import AdjointSeries
from .linearization import StepLinearization

logger = logging.getLogger(__name__)

MIN_MARGIN_CELLS = 2
MARGIN_FRACTION = 0.125

TERMS = ("time", "transport", "drift", "nonlocal_flux", "diffusion", "coupling", "nonlocal_coupling", "source")


class AdjointResidualReport(BaseModel):
    printed: float = Field(description="max over steps of the interior L2 residual")
    per_step_printed: List[float]
    term_norms: Dict[str, float] = Field(description="max over steps of each term's interior L2 norm")
    margin: List[int] = Field(description="cells excluded next to each wall, per axis")


def interior_margin(grid) -> tuple:
    return tuple(max(MIN_MARGIN_CELLS, int(np.ceil(MARGIN_FRACTION * n))) for n in grid.shape)


def _interior_norm(grid, f: np.ndarray) -> float:
    mx, my = interior_margin(grid)
    core = f[mx:-mx, my:-my]
    return float(np.sqrt(np.sum(core * core) * grid.cell_area))


def _jg(model, g: np.ndarray) -> np.ndarray:
    # grad_y J(x - y) = -grad J(x - y)
    return -model.kernel.convolve_gradient(g)


def continuous_adjoint_residual(model, traj: Trajectory, adjoint: AdjointSeries, targets) -> AdjointResidualReport:
    grid = model.grid
    if model.kernel.gradient_table is None:
        raise ConfigError("Adjoint residual needs a kernel with an analytic gradient")
    N = traj.n_steps
    if adjoint.xi.shape[0] != N + 1:
        raise ConfigError(f"Adjoint series has {adjoint.xi.shape[0]} entries, trajectory needs {N + 1}")
    ops = model.ops
    tables = model.tables
    lap = ops.laplacian_matrix(np.ones(grid.shape))
    grad_a = model.kernel.convolve_gradient_scalar(np.ones(grid.shape))
    phi_d = np.asarray(targets.phi_d, dtype=float)
    v_all = adjoint.v
    dt = traj.dt

    steps: List[float] = []
    term_max = {name: 0.0 for name in TERMS}
    for n in range(N):
        lin = StepLinearization.at(model, traj, n)
        phi = lin.phi
        v = v_all[n]
        z = lin.solve(adjoint.xi[n + 1])
        gz = ops.gradient(z)
        drift = phi * grad_a - model.kernel.convolve_gradient_scalar(phi)
        c = tables.coefficient(phi, model.a)

        terms = {
            "time": (adjoint.xi[n] - adjoint.xi[n + 1]) / dt,
            "transport": -np.sum(lin.u * gz, axis=0),
            "drift": lin.dm * np.sum(drift * gz, axis=0),
            "nonlocal_flux": -_jg(model, lin.m * gz),
            "diffusion": -c * (lap @ z.ravel()).reshape(grid.shape),
            "coupling": np.sum(drift * v, axis=0),
            "nonlocal_coupling": -_jg(model, phi * v),
            "source": -(phi - phi_d[n]),
        }
        steps.append(_interior_norm(grid, sum(terms.values())))
        for k, val in terms.items():
            term_max[k] = max(term_max[k], _interior_norm(grid, val))

    report = AdjointResidualReport(printed=max(steps), per_step_printed=steps, term_norms=term_max,
                                   margin=list(interior_margin(grid)))
    logger.info("Adjoint residual %.3e (largest term %s)", report.printed, max(term_max, key=term_max.get))
    return report
