import numpy as np
import pytest

from app.errors import ConfigError, NumericalError, StateError
from app.run_config import InitialSection
from app.solver import DIAGNOSTIC_COLUMNS, Trajectory, run_forward
from app.solver.forward import forcing_at
from app.solver.probes import stability_probe, step_doubling_difference, temporal_convergence
from app.utils.patterns import initial_phase, vortex_field
from conftest import cosine_phase, make_model


def _spinodal(grid, mean=0.0, seed=3):
    return initial_phase(InitialSection(pattern="spinodal", mean=mean, amplitude=0.3), grid, seed)


def test_mass_is_conserved(log_model):
    phi0 = _spinodal(log_model.grid, mean=-0.2)
    result = run_forward(log_model, phi0, 30, 1e-4, forcing=vortex_field(log_model.grid, 0.5))
    masses = np.array([r.mass for r in result.reports])
    assert np.max(np.abs(masses - masses[0])) <= 1e-12 * max(1.0, abs(masses[0]))


def test_free_energy_decays_without_forcing(log_model):
    phi0 = cosine_phase(log_model.grid)
    result = run_forward(log_model, phi0, 50, 1e-4)
    free = np.array([r.free_energy for r in result.reports])
    assert np.max(np.diff(free)) <= 1e-9
    assert free[-1] < free[0]
    for r in result.reports:
        assert r.diss_mu >= 0 and r.diss_visc >= 0 and r.diss_perm >= 0


def test_free_energy_adds_the_local_a_term(log_model):
    grid = log_model.grid
    result = run_forward(log_model, cosine_phase(grid), 3, 1e-4)
    for r, phi in ((result.reports[0], cosine_phase(grid)), (result.reports[-1], result.final.phi)):
        half_a = 0.5 * np.sum(log_model.a * phi * phi) * grid.cell_area
        assert r.free_energy - r.energy == pytest.approx(half_a, rel=1e-12)


def test_constant_phase_is_stationary(log_model):
    grid = log_model.grid
    phi0 = np.full(grid.shape, 0.2)
    result = run_forward(log_model, phi0, 5, 1e-4)
    assert np.max(np.abs(result.final.phi - 0.2)) <= 1e-12
    assert np.max(np.abs(result.final.u)) <= 1e-10
    energies = [r.free_energy for r in result.reports]
    assert max(energies) - min(energies) <= 1e-12 * abs(energies[0])


def test_forward_is_deterministic(obstacle_model):
    phi0 = _spinodal(obstacle_model.grid)
    a = run_forward(obstacle_model, phi0, 5, 1e-4)
    b = run_forward(obstacle_model, phi0, 5, 1e-4)
    assert np.array_equal(a.final.phi, b.final.phi)
    assert np.array_equal(a.final.u, b.final.u)


def test_cg_matches_direct(log_model):
    phi0 = _spinodal(log_model.grid)
    cg = run_forward(log_model, phi0, 5, 1e-4, method="cg")
    direct = run_forward(log_model, phi0, 5, 1e-4, method="direct")
    assert np.max(np.abs(cg.final.phi - direct.final.phi)) <= 1e-8
    assert cg.stats[1].cg_iters > 0


def test_reports_and_callback(log_model):
    calls = []
    phi0 = cosine_phase(log_model.grid)
    result = run_forward(log_model, phi0, 4, 1e-4,
                         on_step=lambda n, state, report, stats: calls.append((n, report.row(stats))))
    assert [n for n, _ in calls] == [0, 1, 2, 3, 4]
    assert len(result.reports) == 5
    assert list(calls[-1][1]) == DIAGNOSTIC_COLUMNS
    assert result.final.t == pytest.approx(4e-4)
    assert calls[-1][1]["div_u_max"] <= 1e-10


def test_trajectory_is_complete(log_model):
    phi0 = cosine_phase(log_model.grid)
    result = run_forward(log_model, phi0, 3, 1e-4, keep_trajectory=True)
    traj = result.trajectory
    assert traj.is_complete()
    assert np.array_equal(traj.phi(0), phi0)
    assert np.array_equal(traj.phi(3), result.final.phi)
    assert traj.phi_series().shape == (4, 16, 16)
    assert traj.u_series().shape == (3, 2, 16, 16)
    with pytest.raises(StateError):
        traj.u(3)
    traj.close()


def test_spooled_trajectory(grid16, rng):
    traj = Trajectory(grid16, 0.1, 2, memory_limit_mb=1e-6)
    assert traj.spooled
    field = rng.standard_normal(grid16.shape)
    traj.store("phi", 1, field)
    assert np.array_equal(traj.load("phi", 1), field)
    assert not traj.is_complete()
    with pytest.raises(StateError):
        traj.phi(0)
    traj.close()
    with pytest.raises(StateError):
        traj.phi(1)


def test_in_memory_trajectory_missing_entry(grid16):
    with Trajectory(grid16, 0.1, 2) as traj:
        assert not traj.spooled
        with pytest.raises(StateError):
            traj.mu(1)


def test_forcing_series_checks(grid16):
    series = np.zeros((2, 2, 16, 16))
    assert forcing_at(series, 1, 0.0, grid16).shape == (2, 16, 16)
    with pytest.raises(ConfigError):
        forcing_at(series, 2, 0.0, grid16)
    with pytest.raises(ConfigError):
        forcing_at(np.zeros((2, 8, 8)), 0, 0.0, grid16)
    assert np.all(forcing_at(None, 0, 0.0, grid16) == 0.0)


def test_invalid_step_count(log_model):
    with pytest.raises(ConfigError):
        run_forward(log_model, cosine_phase(log_model.grid), 0, 1e-4)


def test_phase_bound_violation(obstacle_model):
    phi0 = np.full(obstacle_model.grid.shape, 1.2)
    with pytest.raises(NumericalError):
        run_forward(obstacle_model, phi0, 2, 1e-4)
    result = run_forward(obstacle_model, phi0, 2, 1e-4, check_phase_bound=False)
    assert result.reports[-1].max_abs_phi == pytest.approx(1.2)


def test_stability_probe_is_lipschitz(log_model):
    phi0 = cosine_phase(log_model.grid)
    probe = stability_probe(log_model, phi0, 10, 1e-4, forcing=vortex_field(log_model.grid, 0.5))
    assert probe["slope_phi"] == pytest.approx(1.0, abs=0.05)
    assert probe["slope_u"] == pytest.approx(1.0, abs=0.05)
    assert [r["epsilon"] for r in probe["rows"]] == [1e-2, 1e-3, 1e-4]


def test_step_doubling_is_second_order_locally(log_model):
    phi0 = cosine_phase(log_model.grid)
    ratio = step_doubling_difference(log_model, phi0, 1e-3) / step_doubling_difference(log_model, phi0, 5e-4)
    assert 3.0 <= ratio <= 5.0


def test_temporal_self_convergence(log_model):
    rows = temporal_convergence(log_model, cosine_phase(log_model.grid), 2e-3, 4, levels=3)
    errors = [r["error"] for r in rows]
    assert errors[0] > errors[1] > errors[2] > 0
    assert rows[-1]["order"] >= 0.9


@pytest.mark.slow
def test_mass_conservation_acceptance():
    model = make_model(n=64)
    phi0 = _spinodal(model.grid, mean=-0.2, seed=11)
    result = run_forward(model, phi0, 500, model.default_dt())
    drift = abs(result.reports[-1].mass - result.reports[0].mass)
    assert drift <= 1e-12 * abs(result.reports[0].mass)


@pytest.mark.slow
def test_energy_decay_acceptance():
    model = make_model(n=32)
    result = run_forward(model, cosine_phase(model.grid), 200, 1e-4)
    free = np.array([r.free_energy for r in result.reports])
    assert np.max(np.diff(free)) <= 1e-8


@pytest.mark.slow
def test_stability_probe_acceptance():
    model = make_model(n=32)
    probe = stability_probe(model, cosine_phase(model.grid), 50, 1e-4)
    assert 0.85 <= probe["slope_phi"] <= 1.15
    assert 0.85 <= probe["slope_u"] <= 1.15


@pytest.mark.slow
def test_energy_without_a_term_is_not_monotone():
    # int F - 1/2 int phi J*phi alone rises while the free energy decays
    model = make_model(n=32)
    result = run_forward(model, cosine_phase(model.grid), 200, 1e-4)
    energy = np.array([r.energy for r in result.reports])
    free = np.array([r.free_energy for r in result.reports])
    assert np.max(np.diff(energy)) > 1e-6
    assert energy[-1] > energy[0]
    assert np.max(np.diff(free)) <= 1e-8
