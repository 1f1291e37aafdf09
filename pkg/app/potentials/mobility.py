"""Mobility functions m(s), their derivatives and primitives b(s) = int_0^s m."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from app.errors import ConfigError


class MobilityKind(str, Enum):
    DEGENERATE = "degenerate"
    CUTOFF = "cutoff"
    CONSTANT = "constant"


@dataclass(frozen=True)
class MobilitySpec:
    """Degenerate m = 1 - s^2 (zero outside [-1, 1]), its cutoff at eps, or a constant m0."""

    kind: MobilityKind
    eps: float = 0.9
    m0: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", MobilityKind(self.kind))
        if self.kind == MobilityKind.CUTOFF and not (0 < self.eps < 1):
            raise ConfigError(f"cutoff eps must lie in (0, 1), got {self.eps}")
        if self.kind == MobilityKind.CONSTANT and self.m0 <= 0:
            raise ConfigError(f"constant mobility must be positive, got {self.m0}")

    @property
    def _edge(self) -> float:
        return 1.0 if self.kind == MobilityKind.DEGENERATE else self.eps

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if self.kind == MobilityKind.CONSTANT:
            return np.full_like(s, self.m0)
        e = self._edge
        sc = np.clip(s, -e, e)
        return 1 - sc * sc

    def derivative(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if self.kind == MobilityKind.CONSTANT:
            return np.zeros_like(s)
        e = self._edge
        return np.where(np.abs(s) <= e, -2 * s, 0.0)

    def primitive(self, s) -> np.ndarray:
        """b(s) in closed form."""
        s = np.asarray(s, dtype=float)
        if self.kind == MobilityKind.CONSTANT:
            return self.m0 * s
        e = self._edge
        sc = np.clip(s, -e, e)
        return sc - sc**3 / 3 + (1 - e * e) * (s - sc)

    def breakpoints(self) -> list[float]:
        if self.kind == MobilityKind.CONSTANT:
            return []
        return [-self._edge, self._edge]
