import numpy as np
import pytest

from app.fields.grid import Grid2D
from app.fields.kernel import Kernel
from app.potentials import MobilityKind, MobilitySpec, PotentialKind, PotentialSpec
from app.run_config import RunConfig
from app.solver import PhysicsModel

# 16x16, five steps: small enough for every derivative check to run in seconds
SMALL_CONFIG = {
    "grid": {"nx": 16, "ny": 16},
    "time": {"T": 5e-4, "dt": 1e-4, "snapshot_every": 1},
    "initial": {"pattern": "cosine", "amplitude": 0.3},
    "targets": {"kind": "inverse_crime", "control": {"pattern": "vortex", "amplitude": 0.5}},
    "checks": {"seeds": [0, 1, 2]},
}


def make_model(n=16, potential=PotentialKind.LOGARITHMIC, mobility=MobilityKind.DEGENERATE, nu=0.1, eta=1.0,
               sigma=0.1, strength=6.0, **solver):
    grid = Grid2D(n, n)
    kernel = Kernel.gaussian(grid, sigma=sigma, strength=strength, workers=1)
    mob = MobilitySpec(mobility, eps=0.9)
    model = PhysicsModel.build(grid, kernel, PotentialSpec(potential), mob, nu=nu, eta=eta)
    if solver:
        model = model.with_solver(**solver)
    return model


def cosine_phase(grid, amplitude=0.3, mean=0.0):
    x, y = grid.centers()
    return mean + amplitude * np.cos(np.pi * x / grid.lx) * np.cos(np.pi * y / grid.ly)


def small_config(**overrides) -> RunConfig:
    data = {k: dict(v) if isinstance(v, dict) else v for k, v in SMALL_CONFIG.items()}
    for key, value in overrides.items():
        if isinstance(value, dict):
            data[key] = {**data.get(key, {}), **value}
        else:
            data[key] = value
    return RunConfig.model_validate(data)


@pytest.fixture
def grid16():
    return Grid2D(16, 16)


@pytest.fixture(scope="module")
def log_model():
    return make_model()


@pytest.fixture(scope="module")
def obstacle_model():
    return make_model(potential=PotentialKind.DOUBLE_OBSTACLE, mobility=MobilityKind.CUTOFF)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
