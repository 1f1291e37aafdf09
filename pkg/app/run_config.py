"""Run configuration: a strict YAML document parsed into Pydantic v2 models.

Every section forbids unknown keys. YAML syntax errors are reported with their
line/column, schema errors with the dotted key path; both surface as ConfigError.
"""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import List, Literal, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError
from .potentials.mobility import MobilityKind
from .potentials.potential import PotentialKind

logger = logging.getLogger(__name__)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridSection(_Strict):
    nx: int = Field(default=32, ge=4, description="Cells along x")
    ny: int = Field(default=32, ge=4, description="Cells along y")
    lx: float = Field(default=1.0, gt=0, description="Domain length along x")
    ly: float = Field(default=1.0, gt=0, description="Domain length along y")


class TimeSection(_Strict):
    T: float = Field(default=0.02, gt=0, description="Final time")
    dt: Optional[float] = Field(default=None, gt=0, description="Step size; derived from alpha_1 when omitted")
    snapshot_every: int = Field(default=10, ge=1, description="Write a CHBF snapshot every k steps")


class KernelSection(_Strict):
    profile: Literal["gaussian"] = "gaussian"
    sigma: float = Field(default=0.1, gt=0, description="Gaussian width")
    strength: float = Field(default=6.0, gt=0, description="Integral of J over the plane")
    radius_factor: float = Field(default=4.0, gt=0, description="Support radius R = radius_factor * sigma")


class PotentialSection(_Strict):
    kind: PotentialKind = PotentialKind.LOGARITHMIC
    # theta < theta_c is an assumption check (exit 3), not a parse error
    theta: float = Field(default=0.1, gt=0, description="Absolute temperature (logarithmic only)")
    theta_c: float = Field(default=0.2, gt=0, description="Critical temperature (logarithmic only)")
    delta: float = Field(default=0.05, gt=0, le=0.5, description="Regularization parameter")


class MobilitySection(_Strict):
    kind: MobilityKind
    eps: float = Field(default=0.9, gt=0, lt=1, description="Cutoff threshold")
    m0: float = Field(default=1.0, gt=0, description="Constant mobility value")


class EtaSection(_Strict):
    """Permeability field: a constant plus an optional disk-shaped inclusion."""
    value: float = Field(default=1.0, ge=0)
    inclusion_value: Optional[float] = Field(default=None, ge=0)
    inclusion_center: Tuple[float, float] = (0.5, 0.5)
    inclusion_radius: float = Field(default=0.2, gt=0)


class PhysicsSection(_Strict):
    nu: float = Field(default=0.1, gt=0, description="Constant viscosity")
    eta: EtaSection = Field(default_factory=EtaSection)
    kernel: KernelSection = Field(default_factory=KernelSection)
    potential: PotentialSection = Field(default_factory=PotentialSection)
    mobility: Optional[MobilitySection] = None

    @model_validator(mode="after")
    def _default_mobility(self) -> "PhysicsSection":
        """Degenerate mobility for the logarithmic potential, the cutoff one otherwise."""
        if self.mobility is None:
            if self.potential.kind == PotentialKind.LOGARITHMIC:
                self.mobility = MobilitySection(kind=MobilityKind.DEGENERATE)
            elif self.potential.kind == PotentialKind.DOUBLE_OBSTACLE:
                self.mobility = MobilitySection(kind=MobilityKind.CUTOFF, eps=0.9)
            else:
                self.mobility = MobilitySection(kind=MobilityKind.CONSTANT, m0=1.0)
        return self


class InitialSection(_Strict):
    pattern: Literal["constant", "cosine", "disk", "spinodal"] = "spinodal"
    path: Optional[Path] = Field(default=None, description="CHBF file overriding the pattern")
    mean: float = 0.0
    amplitude: float = Field(default=0.3, ge=0)
    wavenumber: int = Field(default=1, ge=1)
    radius: float = Field(default=0.25, gt=0)
    width: float = Field(default=0.05, gt=0)
    smoothing: float = Field(default=2.0, ge=0, description="Gaussian filter width in cells (spinodal)")
    phi0_cap: float = Field(default=0.95, gt=0, lt=1)


class ForcingSection(_Strict):
    pattern: Literal["zero", "constant", "vortex"] = "zero"
    path: Optional[Path] = Field(default=None, description="Directory holding a CHBF control series")
    amplitude: float = 1.0
    value: Tuple[float, float] = (0.0, 0.0)


class TargetsSection(_Strict):
    kind: Literal["inverse_crime", "files"] = "inverse_crime"
    control: ForcingSection = Field(default_factory=lambda: ForcingSection(pattern="vortex", amplitude=0.5))
    phi_d: Optional[Path] = None
    u_d: Optional[Path] = None
    phi_omega: Optional[Path] = None

    @model_validator(mode="after")
    def _files_present(self) -> "TargetsSection":
        if self.kind == "files":
            missing = [n for n in ("phi_d", "u_d", "phi_omega") if getattr(self, n) is None]
            if missing:
                raise ValueError(f"targets.kind=files requires: {', '.join(missing)}")
        return self


class OptimizerSection(_Strict):
    max_iters: int = Field(default=30, ge=0)
    lower: Tuple[float, float] = (-1.0, -1.0)
    upper: Tuple[float, float] = (1.0, 1.0)
    armijo_c: float = Field(default=1e-4, gt=0, lt=1)
    initial_step: float = Field(default=1.0, gt=0)
    backtrack_factor: float = Field(default=0.5, gt=0, lt=1)
    max_backtracks: int = Field(default=30, ge=1)
    initial_control: Optional[Path] = Field(default=None, description="CHBF control series to resume from")

    @model_validator(mode="after")
    def _ordered_bounds(self) -> "OptimizerSection":
        for lo, hi in zip(self.lower, self.upper):
            if lo > hi:
                raise ValueError(f"optimizer bounds must satisfy lower <= upper, got {self.lower} > {self.upper}")
        return self


class TolerancesSection(_Strict):
    div_tol: float = Field(default=1e-10, gt=0)
    cg_tol: float = Field(default=1e-10, gt=0)
    kkt_tol: float = Field(default=1e-5, gt=0)
    phase_bound_slack: float = Field(default=0.1, ge=0)


class SolverSection(_Strict):
    method: Literal["cg", "direct"] = "cg"
    cg_max_iters: int = Field(default=2000, ge=1)
    minres_max_iters: int = Field(default=20000, ge=1)
    direct_max_cells: int = Field(default=128 * 128, ge=16, description="Largest grid factorized directly")
    memory_limit_mb: float = Field(default=64.0, gt=0, description="Trajectory size kept in memory")


class ChecksSection(_Strict):
    epsilons: List[float] = Field(default_factory=lambda: [1e-2, 1e-3, 1e-4, 1e-5])
    seeds: List[int] = Field(default_factory=lambda: list(range(10)))
    direction: Literal["random", "zero"] = "random"
    slope_range: Tuple[float, float] = (1.9, 2.1)
    dot_tol: float = Field(default=1e-8, gt=0)


class RunConfig(_Strict):
    grid: GridSection = Field(default_factory=GridSection)
    time: TimeSection = Field(default_factory=TimeSection)
    physics: PhysicsSection = Field(default_factory=PhysicsSection)
    initial: InitialSection = Field(default_factory=InitialSection)
    forcing: ForcingSection = Field(default_factory=ForcingSection)
    targets: TargetsSection = Field(default_factory=TargetsSection)
    optimizer: OptimizerSection = Field(default_factory=OptimizerSection)
    tolerances: TolerancesSection = Field(default_factory=TolerancesSection)
    solver: SolverSection = Field(default_factory=SolverSection)
    checks: ChecksSection = Field(default_factory=ChecksSection)
    seed: int = 42

    def step_count(self, dt: float) -> Tuple[int, float]:
        """Return (N, dt') with N = ceil(T/dt) and dt' = T/N."""
        n = max(1, math.ceil(self.time.T / dt - 1e-12))
        return n, self.time.T / n


def _format_errors(err: ValidationError) -> str:
    parts = []
    for item in err.errors():
        loc = ".".join(str(p) for p in item.get("loc", ())) or "<root>"
        parts.append(f"{loc}: {item.get('msg')}")
    return "; ".join(parts)


def parse_run_config(text: str, source: str = "<string>") -> RunConfig:
    """Parse YAML text into a RunConfig, raising ConfigError with location context."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark is not None else ""
        raise ConfigError(f"{source}: YAML syntax error{where}: {getattr(e, 'problem', e)}")

    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: top level must be a mapping")

    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"{source}: invalid configuration: {_format_errors(e)}")


def load_run_config(path: Path) -> RunConfig:
    """Load a run configuration file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read configuration {path}: {e}")
    cfg = parse_run_config(text, source=str(path))
    logger.info("Loaded run configuration from %s", path)
    return cfg
