"""Tangent and adjoint sensitivities of the discrete forward map."""

from .adjoint import AdjointSeries, AdjointState, adjoint_step, adjoint_sweep, reverse, tracking_sources
from .linearization import StepLinearization
from .residual import AdjointResidualReport, continuous_adjoint_residual
from .tangent import TangentSeries, TangentState, tangent_run, tangent_step

__all__ = [
    "AdjointResidualReport",
    "AdjointSeries",
    "AdjointState",
    "StepLinearization",
    "TangentSeries",
    "TangentState",
    "adjoint_step",
    "adjoint_sweep",
    "continuous_adjoint_residual",
    "reverse",
    "tangent_run",
    "tangent_step",
    "tracking_sources",
]
