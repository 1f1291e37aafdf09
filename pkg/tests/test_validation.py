import numpy as np
import pytest

from app.errors import AssumptionError
from app.fields import Grid2D, Kernel
from app.potentials import (
    MobilityKind,
    MobilitySpec,
    OperatorTables,
    PotentialKind,
    PotentialSpec,
    grid_check,
    measure_alpha1,
    validate_assumptions,
)
from app.solver import PhysicsModel


@pytest.fixture(scope="module")
def grid():
    return Grid2D(32, 32)


@pytest.fixture(scope="module")
def kernel(grid):
    return Kernel.gaussian(grid, sigma=0.1, strength=6.0, workers=1)


def _validate(kernel, potential, mobility, nu=0.1, eta=1.0):
    return validate_assumptions(potential, mobility, kernel, np.full(kernel.grid.shape, eta), nu)


def test_default_logarithmic_setup_passes(kernel):
    report = _validate(kernel, PotentialSpec(PotentialKind.LOGARITHMIC, theta=0.1, theta_c=0.2),
                       MobilitySpec(MobilityKind.DEGENERATE))
    assert report.passed, [c.name for c in report.failures()]
    assert report.alpha0 == pytest.approx(0.1, abs=1e-13)
    assert report.alpha1 > 0
    assert report.c0 > 0
    assert report.check("[A2:params]").passed


def test_double_obstacle_with_cutoff_passes(kernel):
    report = _validate(kernel, PotentialSpec(PotentialKind.DOUBLE_OBSTACLE), MobilitySpec(MobilityKind.CUTOFF))
    assert report.passed, [c.name for c in report.failures()]
    assert report.alpha0 == pytest.approx(1 - 0.81)
    assert report.a_min > 1.0


def test_theta_above_critical_fails(kernel):
    report = _validate(kernel, PotentialSpec(PotentialKind.LOGARITHMIC, theta=0.3, theta_c=0.2),
                       MobilitySpec(MobilityKind.DEGENERATE))
    assert not report.passed
    assert not report.check("[A2:params]").passed


def test_log_potential_needs_degenerate_mobility(kernel):
    report = _validate(kernel, PotentialSpec(PotentialKind.LOGARITHMIC), MobilitySpec(MobilityKind.CUTOFF))
    assert not report.check("[A1]").passed


def test_invalid_viscosity_fails(kernel):
    report = _validate(kernel, PotentialSpec(PotentialKind.DOUBLE_OBSTACLE), MobilitySpec(MobilityKind.CUTOFF),
                       nu=0.0)
    assert not report.check("[N]").passed


def test_weak_kernel_breaks_alpha1(grid):
    weak = Kernel.gaussian(grid, sigma=0.1, strength=0.5, workers=1)
    tables = OperatorTables(PotentialSpec(PotentialKind.POLYNOMIAL), MobilitySpec(MobilityKind.CONSTANT))
    alpha1 = measure_alpha1(tables, weak.a_min)
    assert alpha1 == pytest.approx(weak.a_min - 1.0, abs=1e-12)
    report = validate_assumptions(tables.potential, tables.mobility, weak, np.ones(grid.shape), 0.1)
    a4 = report.check("[A4]")
    assert not a4.passed
    assert a4.sample is not None and len(a4.sample) == 3

    model = PhysicsModel.build(grid, weak, tables.potential, tables.mobility)
    with pytest.raises(AssumptionError):
        model.default_dt()
    with pytest.raises(AssumptionError):
        model.time_grid(0.01, 1e-4)


def test_default_dt_from_alpha1(kernel):
    model = PhysicsModel.build(kernel.grid, kernel, PotentialSpec(PotentialKind.LOGARITHMIC),
                               MobilitySpec(MobilityKind.DEGENERATE))
    assert model.default_dt() == pytest.approx(0.1 * kernel.grid.h_min ** 2 / model.alpha1)
    n, dt = model.time_grid(0.01, 3e-3)
    assert n == 4 and dt == pytest.approx(0.0025)


def test_grid_must_resolve_kernel():
    coarse = Grid2D(8, 8)
    assert not grid_check(coarse, Kernel.gaussian(coarse, sigma=0.1, workers=1)).passed
    fine = Grid2D(16, 16)
    assert grid_check(fine, Kernel.gaussian(fine, sigma=0.1, workers=1)).passed
