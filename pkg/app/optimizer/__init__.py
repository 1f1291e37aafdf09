"""Tracking cost, admissible boxes and the projected-gradient optimal-control solver."""

from .checks import (
    CHECK_COLUMNS,
    DotProductReport,
    TaylorReport,
    VariationalInequalityReport,
    adjoint_residual_study,
    dot_product_test,
    smooth_control_direction,
    taylor_test,
    variational_inequality_check,
)
from .cost import CostBreakdown, TrackingTargets, control_inner, control_norm, cost, cost_terms
from .ocp import (
    ITERATE_COLUMNS,
    ControlIterate,
    Evaluation,
    OcpProblem,
    OcpResult,
    reduced_gradient,
    solve_ocp,
)
from .projection import Bounds, project
from .targets import build_targets

__all__ = [
    "Bounds",
    "CHECK_COLUMNS",
    "ControlIterate",
    "CostBreakdown",
    "DotProductReport",
    "Evaluation",
    "ITERATE_COLUMNS",
    "OcpProblem",
    "OcpResult",
    "TaylorReport",
    "TrackingTargets",
    "VariationalInequalityReport",
    "adjoint_residual_study",
    "build_targets",
    "control_inner",
    "control_norm",
    "cost",
    "cost_terms",
    "dot_product_test",
    "project",
    "reduced_gradient",
    "smooth_control_direction",
    "solve_ocp",
    "taylor_test",
    "variational_inequality_check",
]
