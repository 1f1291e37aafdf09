"""Sampled checks of the structural assumptions on viscosity, kernel, mobility and potential.

[N]   nu > 0 and eta >= 0.
[J]   kernel even on the stencil and a(x) >= 0.
[A1]  m >= 0, m = 0 exactly at +-1, monotone near +-1 (degenerate mobility).
[A2]  lambda_1 = m F1'' >= alpha_0 > 0 on [-1, 1].
[A3]  F'' monotone near +-1.
[A4]  m (F'' + a) >= alpha_1 > 0.
[H1]  F_delta'' + a >= c_0 > 0.
[H2]  F_delta'' + a >= c_1 |s|^(2q) - c_2, q = 1/2.
[H3]  |F_delta'|^p <= c_3 |F_delta + 1|, p = 3/2.

[A2]-[A4] use the unregularized potential, [H1]-[H3] the regularized one.
"""

from __future__ import annotations

import logging
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field

from app.fields.grid import Grid2D
from app.fields.kernel import Kernel
from .mobility import MobilityKind, MobilitySpec
from .potential import PotentialKind, PotentialSpec
from .tables import OperatorTables

logger = logging.getLogger(__name__)

_SAMPLES = 4001
_EDGE = 0.05
_EVEN_TOL = 1e-14


class AssumptionCheck(BaseModel):
    name: str = Field(description="Assumption label, e.g. [A4]")
    passed: bool
    margin: Optional[float] = Field(default=None, description="Measured constant or margin")
    detail: str = ""
    sample: Optional[List[float]] = Field(default=None, description="Violating sample point (s, x, y)")


class ValidationReport(BaseModel):
    checks: List[AssumptionCheck]
    alpha0: float
    alpha1: float
    c0: float
    a_min: float
    evenness_defect: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> List[AssumptionCheck]:
        return [c for c in self.checks if not c.passed]

    def check(self, name: str) -> AssumptionCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _open_samples() -> np.ndarray:
    return np.linspace(-1.0, 1.0, _SAMPLES)[1:-1]


def _argmin_point(values: np.ndarray, s: np.ndarray, where: Optional[tuple] = None) -> List[float]:
    k = int(np.argmin(values))
    point = [float(s[k])]
    if where is not None:
        point += [float(where[0]), float(where[1])]
    return point


def measure_alpha1(tables: OperatorTables, a_min: float) -> float:
    """min over sampled s in (-1, 1) of lambda_1(s) + m(s) (F2''(s) + a_min).

    m >= 0 makes the product linear and non-decreasing in a, so the minimum over
    the grid is attained where a is smallest.
    """
    s = _open_samples()
    vals = tables.lam(s, "singular", regularized=False) + tables.m(s) * (
        tables.potential.smooth(s, 2) + a_min)
    return float(np.min(vals))


def _a_argmin(kernel: Kernel) -> tuple:
    i, j = np.unravel_index(int(np.argmin(kernel.a)), kernel.a.shape)
    x, y = kernel.grid.centers()
    return (x[i, j], y[i, j])


def validate_assumptions(spec: PotentialSpec, mob: MobilitySpec, k: Kernel, eta: np.ndarray,
                         nu: float) -> ValidationReport:
    tables = OperatorTables(spec, mob)
    checks: List[AssumptionCheck] = []
    a_min = k.a_min
    a_at = _a_argmin(k)

    # [N]
    eta_min = float(np.min(eta))
    checks.append(AssumptionCheck(
        name="[N]", passed=bool(nu > 0 and eta_min >= 0), margin=min(nu, eta_min),
        detail=f"nu={nu:g}, min eta={eta_min:g}"))

    # [J]
    defect = k.evenness_defect
    scale = float(np.max(np.abs(k.table))) or 1.0
    even = defect <= _EVEN_TOL * scale
    checks.append(AssumptionCheck(
        name="[J]", passed=bool(even and a_min >= 0), margin=a_min,
        detail=f"evenness defect={defect:.3e}, min a={a_min:.6g}",
        sample=None if a_min >= 0 else [float(a_at[0]), float(a_at[1])]))

    # Parameters of the logarithmic potential
    if spec.kind == PotentialKind.LOGARITHMIC:
        ok = 0 < spec.theta < spec.theta_c
        checks.append(AssumptionCheck(
            name="[A2:params]", passed=bool(ok), margin=spec.theta_c - spec.theta,
            detail=f"requires 0 < theta < theta_c, got theta={spec.theta:g}, theta_c={spec.theta_c:g}"))

    s = _open_samples()
    edge = s[s >= 1 - _EDGE]
    m = tables.m(s)

    # [A1]
    if mob.kind == MobilityKind.DEGENERATE:
        ends = tables.m(np.array([-1.0, 1.0]))
        mono = np.all(np.diff(tables.m(edge)) <= 0) and np.all(np.diff(tables.m(-edge[::-1])) >= 0)
        ok = bool(np.all(ends == 0) and np.all(m > 0) and mono)
        checks.append(AssumptionCheck(name="[A1]", passed=ok, margin=float(np.min(m)),
                                      detail="m vanishes exactly at +-1 and is positive inside"))
    elif spec.kind == PotentialKind.DOUBLE_OBSTACLE:
        checks.append(AssumptionCheck(
            name="[A1]", passed=True, margin=float(np.min(m)),
            detail="non-degenerate mobility bounded below; sufficient for the double obstacle"))
    else:
        checks.append(AssumptionCheck(
            name="[A1]", passed=False, margin=float(np.min(m)),
            detail="non-degenerate mobility cannot compensate the singular F''"))

    # [A2]
    lam1 = tables.lam(s, "singular", regularized=False)
    alpha0 = float(np.min(lam1))
    ok = bool(np.all(np.isfinite(lam1)) and alpha0 > 0)
    checks.append(AssumptionCheck(
        name="[A2]", passed=ok, margin=alpha0, detail="lambda_1 = m F1'' bounded below",
        sample=None if ok else _argmin_point(lam1, s)))

    # [A3]
    f2_hi = tables.d2F(edge, regularized=False)
    f2_lo = tables.d2F(-edge[::-1], regularized=False)
    ok = bool(np.all(np.diff(f2_hi) >= -1e-12) and np.all(np.diff(f2_lo) <= 1e-12))
    checks.append(AssumptionCheck(name="[A3]", passed=ok, margin=_EDGE,
                                  detail=f"F'' monotone on [1-{_EDGE}, 1) and (-1, -1+{_EDGE}]"))

    # [A4]
    a4 = lam1 + m * (tables.potential.smooth(s, 2) + a_min)
    alpha1 = float(np.min(a4))
    ok = alpha1 > 0
    checks.append(AssumptionCheck(
        name="[A4]", passed=bool(ok), margin=alpha1, detail="m (F'' + a) bounded below",
        sample=None if ok else _argmin_point(a4, s, a_at)))

    # [H1]-[H3] on the regularized family over a range wider than [-1, 1]
    wide = np.linspace(-3.0, 3.0, 6001)
    g = tables.d2F(wide) + a_min
    c0 = float(np.min(g))
    checks.append(AssumptionCheck(
        name="[H1]", passed=bool(c0 > 0), margin=c0, detail="F_delta'' + a >= c_0",
        sample=None if c0 > 0 else _argmin_point(g, wide, a_at)))

    c2 = max(0.0, -c0) + 1.0
    far = np.abs(wide) >= 1.0
    c1 = float(np.min((g[far] + c2) / np.abs(wide[far])))
    checks.append(AssumptionCheck(name="[H2]", passed=bool(c1 > 0), margin=c1,
                                  detail=f"q=1/2 with c_2={c2:g}"))

    f = tables.potential(wide)
    df = tables.dF(wide)
    denom = np.abs(f + 1)
    with np.errstate(divide="ignore"):
        ratio = np.abs(df) ** 1.5 / denom
    c3 = float(np.max(ratio))
    checks.append(AssumptionCheck(name="[H3]", passed=bool(np.isfinite(c3)), margin=c3, detail="p=3/2"))

    report = ValidationReport(checks=checks, alpha0=alpha0, alpha1=alpha1, c0=c0, a_min=a_min,
                              evenness_defect=defect)
    for c in report.failures():
        logger.warning("Assumption %s failed: %s (margin=%s)", c.name, c.detail, c.margin)
    logger.info("Assumption validation: %s (alpha0=%.4g, alpha1=%.4g, c0=%.4g)",
                "pass" if report.passed else "FAIL", alpha0, alpha1, c0)
    return report


def grid_check(grid: Grid2D, kernel: Kernel) -> AssumptionCheck:
    """The kernel width must be resolved by the grid."""
    sigma = kernel.params.get("sigma")
    if sigma is None:
        return AssumptionCheck(name="[grid]", passed=True, detail="tabulated kernel")
    h = max(grid.hx, grid.hy)
    return AssumptionCheck(name="[grid]", passed=bool(sigma >= h), margin=sigma / h,
                           detail=f"sigma/h = {sigma / h:.3g} (needs >= 1)")
