"""Exception hierarchy shared by the solver, the optimizer and the CLI.

Every error carries the process exit code the CLI returns for it:
0 ok, 2 configuration error, 3 assumption-validation failure, 4 numerical failure.
"""

from __future__ import annotations

from typing import Optional


class ChbError(Exception):
    """Base class for all expected failures of a run."""

    exit_code: int = 1


class ConfigError(ChbError):
    """Invalid configuration, mismatched grids or axes, malformed input files."""

    exit_code = 2


class DomainError(ChbError):
    """A function was evaluated outside its domain (e.g. log potential at |r| >= 1)."""

    exit_code = 2


class AssumptionError(ChbError):
    """Structural assumptions failed; the solver refuses to run."""

    exit_code = 3


class NumericalError(ChbError):
    """Linear-solver non-convergence, violated tolerances, non-finite values."""

    exit_code = 4

    def __init__(self, message: str, residual: Optional[float] = None):
        super().__init__(message)
        self.residual = residual


class StateError(NumericalError):
    """Missing or incomplete trajectory data."""


__all__ = [
    "ChbError",
    "ConfigError",
    "DomainError",
    "AssumptionError",
    "NumericalError",
    "StateError",
]
