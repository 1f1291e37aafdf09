"""Physics model: grid, kernel, constitutive tables and solver options of one run."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

from app.errors import AssumptionError, ConfigError
from app.fields.grid import Grid2D
from app.fields.kernel import Kernel
from app.fields.operators import GridOperators, grid_operators
from app.potentials.mobility import MobilitySpec
from app.potentials.potential import PotentialSpec
from app.potentials.tables import OperatorTables
from app.potentials.validation import measure_alpha1
from app.run_config import EtaSection, RunConfig, SolverSection, TolerancesSection
from .brinkman import BrinkmanSolver

logger = logging.getLogger(__name__)


def eta_field(grid: Grid2D, section: EtaSection) -> np.ndarray:
    """Constant permeability with an optional disk of a different value."""
    eta = np.full(grid.shape, float(section.value))
    if section.inclusion_value is not None:
        x, y = grid.centers()
        cx, cy = section.inclusion_center
        inside = (x - cx) ** 2 + (y - cy) ** 2 <= section.inclusion_radius ** 2
        eta[inside] = section.inclusion_value
    return eta


@dataclass(eq=False)
class PhysicsModel:
    grid: Grid2D
    kernel: Kernel
    tables: OperatorTables
    nu: float
    eta: np.ndarray
    tolerances: TolerancesSection = field(default_factory=TolerancesSection)
    solver: SolverSection = field(default_factory=SolverSection)

    def __post_init__(self):
        if self.kernel.grid != self.grid:
            raise ConfigError(f"Kernel grid {self.kernel.grid} does not match model grid {self.grid}")
        if self.nu <= 0:
            raise ConfigError(f"Viscosity must be positive, got {self.nu}")
        self.eta = np.broadcast_to(np.asarray(self.eta, dtype=float), self.grid.shape).copy()
        if np.any(self.eta < 0):
            raise ConfigError("Permeability eta must be non-negative")

    @classmethod
    def build(cls, grid: Grid2D, kernel: Kernel, potential: PotentialSpec, mobility: MobilitySpec,
              nu: float = 0.1, eta=1.0, tolerances: Optional[TolerancesSection] = None,
              solver: Optional[SolverSection] = None) -> "PhysicsModel":
        return cls(grid=grid, kernel=kernel, tables=OperatorTables(potential, mobility), nu=nu, eta=eta,
                   tolerances=tolerances or TolerancesSection(), solver=solver or SolverSection())

    @classmethod
    def from_config(cls, cfg: RunConfig) -> "PhysicsModel":
        g = cfg.grid
        grid = Grid2D(g.nx, g.ny, g.lx, g.ly)
        ph = cfg.physics
        kernel = Kernel.gaussian(grid, sigma=ph.kernel.sigma, strength=ph.kernel.strength,
                                 radius_factor=ph.kernel.radius_factor)
        potential = PotentialSpec(ph.potential.kind, theta=ph.potential.theta,
                                  theta_c=ph.potential.theta_c, delta=ph.potential.delta)
        mobility = MobilitySpec(ph.mobility.kind, eps=ph.mobility.eps, m0=ph.mobility.m0)
        model = cls(grid=grid, kernel=kernel, tables=OperatorTables(potential, mobility), nu=ph.nu,
                    eta=eta_field(grid, ph.eta), tolerances=cfg.tolerances, solver=cfg.solver)
        logger.info("Physics model: %dx%d grid, %s potential, %s mobility, nu=%g",
                    grid.nx, grid.ny, potential.kind.value, mobility.kind.value, ph.nu)
        return model

    def with_solver(self, **updates) -> "PhysicsModel":
        """Copy sharing the grid and kernel, with solver options overridden."""
        return PhysicsModel(grid=self.grid, kernel=self.kernel, tables=self.tables, nu=self.nu,
                            eta=self.eta, tolerances=self.tolerances,
                            solver=self.solver.model_copy(update=updates))

    # ---- derived quantities ----------------------------------------------
    @property
    def ops(self) -> GridOperators:
        return grid_operators(self.grid)

    @property
    def a(self) -> np.ndarray:
        return self.kernel.a

    @property
    def grad_a(self) -> np.ndarray:
        return self.kernel.grad_a

    @cached_property
    def alpha1(self) -> float:
        return measure_alpha1(self.tables, self.kernel.a_min)

    @cached_property
    def brinkman(self) -> BrinkmanSolver:
        return BrinkmanSolver(self.grid, self.nu, self.eta, self.solver, self.tolerances)

    def default_dt(self) -> float:
        """0.1 h_min^2 / alpha_1; refuses to run when alpha_1 <= 0."""
        if self.alpha1 <= 0:
            raise AssumptionError(f"Measured alpha_1 = {self.alpha1:.4g} <= 0, the implicit step is not elliptic")
        return 0.1 * self.grid.h_min ** 2 / self.alpha1

    def time_grid(self, T: float, dt: Optional[float] = None) -> Tuple[int, float]:
        """(N, dt) with N = ceil(T/dt) and dt adjusted to T/N."""
        if T <= 0:
            raise ConfigError(f"Final time must be positive, got {T}")
        if dt is None:
            dt = self.default_dt()
        elif self.alpha1 <= 0:
            raise AssumptionError(f"Measured alpha_1 = {self.alpha1:.4g} <= 0, the implicit step is not elliptic")
        n = max(1, int(np.ceil(T / dt - 1e-12)))
        return n, T / n
