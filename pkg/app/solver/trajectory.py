"""Stored forward trajectory: phi^0..phi^N, u^0..u^{N-1}, mu^0..mu^{N-1}.

Kept in memory while the estimated size fits `memory_limit_mb`; larger runs are
spooled to CHBF files in a temporary directory removed by `close()`.
"""

from __future__ import annotations

import logging
import shutil
import tempfile
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from app.errors import StateError
from app.fields.grid import Grid2D
from app.storage.chbf import read_snapshot, series_path, write_snapshot

logger = logging.getLogger(__name__)

_FIELDS = ("phi", "u", "mu")


class Trajectory:
    def __init__(self, grid: Grid2D, dt: float, n_steps: int, t0: float = 0.0,
                 memory_limit_mb: float = 64.0):
        self.grid = grid
        self.dt = float(dt)
        self.n_steps = int(n_steps)
        self.t0 = float(t0)
        # phi, mu scalar and u vector per step
        estimate_mb = 4 * grid.size * 8 * (self.n_steps + 1) / 2**20
        self.spooled = estimate_mb > memory_limit_mb
        self._dir: Optional[Path] = None
        self._mem: Dict[str, List[Optional[np.ndarray]]] = {}
        if self.spooled:
            self._dir = Path(tempfile.mkdtemp(prefix="chb_traj_"))
            logger.info("Trajectory of ~%.1f MB spooled to %s", estimate_mb, self._dir)
        else:
            self._mem = {"phi": [None] * (self.n_steps + 1), "u": [None] * self.n_steps,
                         "mu": [None] * self.n_steps}

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_steps + 1)

    def _check_index(self, name: str, n: int) -> None:
        top = self.n_steps if name == "phi" else self.n_steps - 1
        if not 0 <= n <= top:
            raise StateError(f"Trajectory has no {name} at step {n} (valid 0..{top})")

    def store(self, name: str, n: int, value: np.ndarray) -> None:
        if name not in _FIELDS:
            raise KeyError(name)
        self._check_index(name, n)
        if self.spooled:
            write_snapshot(series_path(self._dir, name, n), self.grid, value)
        else:
            self._mem[name][n] = np.array(value, dtype=float, copy=True)

    def load(self, name: str, n: int) -> np.ndarray:
        self._check_index(name, n)
        if self.spooled:
            if self._dir is None:
                raise StateError("Trajectory spool was already removed")
            path = series_path(self._dir, name, n)
            if not path.exists():
                raise StateError(f"Missing spooled snapshot {path.name}")
            return read_snapshot(path)[1]
        value = self._mem[name][n]
        if value is None:
            raise StateError(f"Trajectory snapshot {name}[{n}] was never stored")
        return value

    def phi(self, n: int) -> np.ndarray:
        return self.load("phi", n)

    def u(self, n: int) -> np.ndarray:
        return self.load("u", n)

    def mu(self, n: int) -> np.ndarray:
        return self.load("mu", n)

    def phi_series(self) -> np.ndarray:
        return np.stack([self.phi(n) for n in range(self.n_steps + 1)])

    def u_series(self) -> np.ndarray:
        return np.stack([self.u(n) for n in range(self.n_steps)])

    def is_complete(self) -> bool:
        try:
            for n in range(self.n_steps + 1):
                self.phi(n)
            for n in range(self.n_steps):
                self.u(n)
                self.mu(n)
        except StateError:
            return False
        return True

    def close(self) -> None:
        if self._dir is not None:
            shutil.rmtree(self._dir, ignore_errors=True)
            self._dir = None

    def __enter__(self) -> "Trajectory":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
