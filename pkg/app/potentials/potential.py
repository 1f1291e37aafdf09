"""Double obstacle, logarithmic and polynomial free energies with their C3 regularizations.

Each potential is split as F = F1 + F2 with F1 the convex (singular) part and
F2 the smooth concave part:

- double obstacle: F1 = r^2/2 + indicator of [-1, 1], F2 = (1 - 2 r^2)/2;
  regularized by replacing the indicator with the five-branch beta_do.
- logarithmic: F1 = theta/2 [(1+r)ln(1+r) + (1-r)ln(1-r)], F2 = theta_c (1 - r^2)/2;
  regularized by cubic Taylor continuation of F1 beyond +-(1 - delta).
- polynomial (experimental): F1 = r^4/4, F2 = (1 - 2 r^2)/4.

All evaluators take arrays and an `order` (0..3) selecting the derivative.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from math import factorial

import numpy as np

from app.errors import ConfigError, DomainError

logger = logging.getLogger(__name__)


class PotentialKind(str, Enum):
    DOUBLE_OBSTACLE = "double_obstacle"
    LOGARITHMIC = "logarithmic"
    POLYNOMIAL = "polynomial"


def beta_do(delta: float, r, order: int = 0) -> np.ndarray:
    """Five-branch C3 penalty replacing the indicator of [-1, 1]."""
    r = np.asarray(r, dtype=float)
    d2, d3 = delta**2, delta**3
    sp_ = r - (1 + delta / 2)
    sn = r + (1 + delta / 2)
    hi = r >= 1 + delta
    mid_hi = (r > 1) & ~hi
    lo = r <= -1 - delta
    mid_lo = (r < -1) & ~lo

    if order == 0:
        branches = [4 / d2 * sp_**3 + sp_, (r - 1) ** 4 / d3, (r + 1) ** 4 / d3, -4 / d2 * sn**3 - sn]
    elif order == 1:
        branches = [12 / d2 * sp_**2 + 1, 4 * (r - 1) ** 3 / d3, 4 * (r + 1) ** 3 / d3, -12 / d2 * sn**2 - 1]
    elif order == 2:
        branches = [24 / d2 * sp_, 12 * (r - 1) ** 2 / d3, 12 * (r + 1) ** 2 / d3, -24 / d2 * sn]
    elif order == 3:
        branches = [np.full_like(r, 24 / d2), 24 * (r - 1) / d3, 24 * (r + 1) / d3, np.full_like(r, -24 / d2)]
    else:
        raise ValueError(f"order must be 0..3, got {order}")
    return np.select([hi, mid_hi, mid_lo, lo], branches, default=0.0)


def _log_singular(theta: float, r: np.ndarray, order: int) -> np.ndarray:
    if np.any(np.abs(r) >= 1):
        raise DomainError("Logarithmic potential is undefined for |r| >= 1")
    if order == 0:
        return 0.5 * theta * ((1 + r) * np.log1p(r) + (1 - r) * np.log1p(-r))
    q = 1 - r * r
    if order == 1:
        return theta * np.arctanh(r)
    if order == 2:
        return theta / q
    if order == 3:
        return 2 * theta * r / q**2
    raise ValueError(f"order must be 0..3, got {order}")


def _log_singular_regularized(theta: float, delta: float, r: np.ndarray, order: int) -> np.ndarray:
    p = 1.0 - delta
    inner = _log_singular(theta, np.clip(r, -p, p), order)
    out = inner
    for anchor, mask in ((p, r > p), (-p, r < -p)):
        if not np.any(mask):
            continue
        x = r - anchor
        anchor_arr = np.array(anchor)
        derivs = [float(_log_singular(theta, anchor_arr, k)) for k in range(4)]
        taylor = sum(derivs[j] * x ** (j - order) / factorial(j - order) for j in range(order, 4))
        out = np.where(mask, taylor, out)
    return out


@dataclass(frozen=True)
class PotentialSpec:
    """Which potential, its parameters and the regularization width delta."""

    kind: PotentialKind
    theta: float = 0.1
    theta_c: float = 0.2
    delta: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "kind", PotentialKind(self.kind))
        if not (0 < self.delta <= 0.5):
            raise ConfigError(f"delta must lie in (0, 1/2], got {self.delta}")
        if self.kind == PotentialKind.LOGARITHMIC and self.theta <= 0:
            raise ConfigError(f"theta must be positive, got {self.theta}")
        if self.kind == PotentialKind.POLYNOMIAL:
            logger.warning("Polynomial double-well potential is experimental")

    # ---- parts -----------------------------------------------------------
    def singular(self, r, order: int = 0, regularized: bool = True) -> np.ndarray:
        """F1 (or F1_delta) and its derivatives."""
        r = np.asarray(r, dtype=float)
        if self.kind == PotentialKind.DOUBLE_OBSTACLE:
            quad = [0.5 * r * r, r, np.ones_like(r), np.zeros_like(r)][order]
            if regularized:
                return beta_do(self.delta, r, order) + quad
            return np.where(np.abs(r) <= 1, quad, np.inf)
        if self.kind == PotentialKind.LOGARITHMIC:
            if regularized:
                return _log_singular_regularized(self.theta, self.delta, r, order)
            return _log_singular(self.theta, r, order)
        return [0.25 * r**4, r**3, 3 * r * r, 6 * r][order]

    def smooth(self, r, order: int = 0) -> np.ndarray:
        """F2 and its derivatives."""
        r = np.asarray(r, dtype=float)
        if self.kind == PotentialKind.DOUBLE_OBSTACLE:
            return [0.5 - r * r, -2 * r, np.full_like(r, -2.0), np.zeros_like(r)][order]
        if self.kind == PotentialKind.LOGARITHMIC:
            tc = self.theta_c
            return [0.5 * tc * (1 - r * r), -tc * r, np.full_like(r, -tc), np.zeros_like(r)][order]
        return [0.25 * (1 - 2 * r * r), -r, np.full_like(r, -1.0), np.zeros_like(r)][order]

    def __call__(self, r, order: int = 0, regularized: bool = True) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if order == 0 and self.kind == PotentialKind.DOUBLE_OBSTACLE:
            # Same expression as the unregularized branch so both agree bit-exactly on [-1, 1]
            base = 0.5 * (1 - r * r)
            if regularized:
                return beta_do(self.delta, r) + base
            return np.where(np.abs(r) <= 1, base, np.inf)
        if order == 0 and self.kind == PotentialKind.POLYNOMIAL:
            return 0.25 * (r * r - 1) ** 2
        return self.singular(r, order, regularized) + self.smooth(r, order)


def eval_potential(spec: PotentialSpec, r, regularized: bool = True) -> np.ndarray:
    """F(r), or F_delta(r) when regularized; +inf outside [-1, 1] for the bare obstacle."""
    return spec(r, 0, regularized)


def eval_beta_do(delta: float, r) -> np.ndarray:
    if not (0 < delta <= 0.5):
        raise ConfigError(f"delta must lie in (0, 1/2], got {delta}")
    return beta_do(delta, r)
