"""Operator calculus built from a potential and a mobility.

lambda = m F'', b = int_0^s m, B = int_0^s lambda, B~(s; x) = B(s) + a(x) b(s).
The implicit Cahn-Hilliard coefficient is B~' = m a + lambda.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import integrate

from .mobility import MobilityKind, MobilitySpec
from .potential import PotentialKind, PotentialSpec

logger = logging.getLogger(__name__)

Part = Literal["full", "singular", "smooth"]


@dataclass(frozen=True)
class OperatorTables:
    potential: PotentialSpec
    mobility: MobilitySpec

    # ---- mobility ------------------------------------------------------
    def m(self, s) -> np.ndarray:
        return self.mobility(s)

    def dm(self, s) -> np.ndarray:
        return self.mobility.derivative(s)

    # ---- potential -----------------------------------------------------
    def dF(self, s, regularized: bool = True) -> np.ndarray:
        return self.potential(s, 1, regularized)

    def d2F(self, s, regularized: bool = True) -> np.ndarray:
        return self.potential(s, 2, regularized)

    def d3F(self, s, regularized: bool = True) -> np.ndarray:
        return self.potential(s, 3, regularized)

    # ---- lambda --------------------------------------------------------
    def _compensated(self) -> bool:
        return (self.potential.kind == PotentialKind.LOGARITHMIC
                and self.mobility.kind == MobilityKind.DEGENERATE)

    def lam(self, s, part: Part = "full", regularized: bool = True) -> np.ndarray:
        """lambda(s) = m(s) F''(s), or one of its parts m F1'' / m F2''."""
        s = np.asarray(s, dtype=float)
        m = self.m(s)
        if part == "smooth":
            return m * self.potential.smooth(s, 2)
        if not regularized and self._compensated():
            # (1 - s^2) * theta / (1 - s^2), continuous up to the endpoints
            if np.any(np.abs(s) > 1):
                singular = m * self.potential.singular(s, 2, regularized=False)
            else:
                singular = np.full_like(s, self.potential.theta)
        else:
            singular = m * self.potential.singular(s, 2, regularized)
        if part == "singular":
            return singular
        return singular + m * self.potential.smooth(s, 2)

    def dlam(self, s) -> np.ndarray:
        """lambda'(s) for the regularized potential."""
        return self.dm(s) * self.d2F(s) + self.m(s) * self.d3F(s)

    # ---- implicit coefficient ------------------------------------------
    def coefficient(self, s, a) -> np.ndarray:
        """B~'(s; x) = m(s) a(x) + lambda(s)."""
        return self.m(s) * a + self.lam(s)

    def coefficient_derivative(self, s, a) -> np.ndarray:
        return self.dm(s) * a + self.dlam(s)

    # ---- primitives ----------------------------------------------------
    def b(self, s) -> np.ndarray:
        return self.mobility.primitive(s)

    def _breakpoints(self) -> list[float]:
        pts = list(self.mobility.breakpoints())
        d = self.potential.delta
        if self.potential.kind == PotentialKind.DOUBLE_OBSTACLE:
            pts += [-1 - d, -1.0, 1.0, 1 + d]
        elif self.potential.kind == PotentialKind.LOGARITHMIC:
            pts += [-(1 - d), 1 - d]
        return sorted(set(pts))

    def B(self, s, part: Part = "full", regularized: bool = True) -> np.ndarray:
        """int_0^s lambda by adaptive quadrature (abs tol 1e-12)."""
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.empty_like(s_arr)
        for k, upper in enumerate(s_arr.ravel()):
            if upper == 0.0:
                out.flat[k] = 0.0
                continue
            lo, hi = min(0.0, upper), max(0.0, upper)
            points = [p for p in self._breakpoints() if lo < p < hi] or None
            val, _ = integrate.quad(
                lambda t: float(self.lam(np.array(t), part, regularized)),
                lo, hi, points=points, epsabs=1e-12, epsrel=1e-12, limit=200,
            )
            out.flat[k] = val if upper > 0 else -val
        return out.reshape(np.shape(s)) if np.ndim(s) else out[0]

    def b_tilde(self, s, a) -> np.ndarray:
        return self.B(s) + np.asarray(a) * self.b(s)


def eval_lambda(ot: OperatorTables, s, part: Part = "full", regularized: bool = True) -> np.ndarray:
    return ot.lam(s, part, regularized)


def eval_b_B(ot: OperatorTables, s, part: Part = "full", regularized: bool = True):
    """Return (b(s), B(s))."""
    return ot.b(s), ot.B(s, part, regularized)
