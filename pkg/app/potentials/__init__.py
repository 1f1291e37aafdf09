from .mobility import MobilityKind, MobilitySpec
from .potential import PotentialKind, PotentialSpec, beta_do, eval_beta_do, eval_potential
from .tables import OperatorTables, eval_b_B, eval_lambda
from .validation import AssumptionCheck, ValidationReport, grid_check, measure_alpha1, validate_assumptions

__all__ = [
    "AssumptionCheck",
    "MobilityKind",
    "MobilitySpec",
    "OperatorTables",
    "PotentialKind",
    "PotentialSpec",
    "ValidationReport",
    "beta_do",
    "eval_b_B",
    "eval_beta_do",
    "eval_lambda",
    "eval_potential",
    "grid_check",
    "measure_alpha1",
    "validate_assumptions",
]
