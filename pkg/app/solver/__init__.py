"""Forward solver: Brinkman saddle solve and semi-implicit Cahn-Hilliard stepping."""

from .brinkman import BrinkmanSolver, brinkman_solve, korteweg_rhs
from .cahn_hilliard import ch_solve, ch_step, chemical_potential
from .forward import ForwardResult, advance, energy, initial_state, run_forward
from .model import PhysicsModel, eta_field
from .state import DIAGNOSTIC_COLUMNS, EnergyReport, SolverState, StepStats
from .trajectory import Trajectory

__all__ = [
    "BrinkmanSolver",
    "DIAGNOSTIC_COLUMNS",
    "EnergyReport",
    "ForwardResult",
    "PhysicsModel",
    "SolverState",
    "StepStats",
    "Trajectory",
    "advance",
    "brinkman_solve",
    "ch_solve",
    "ch_step",
    "chemical_potential",
    "energy",
    "eta_field",
    "initial_state",
    "korteweg_rhs",
    "run_forward",
]
