import numpy as np
import pytest

from app.errors import ConfigError, StateError
from app.fields.grid import Grid2D
from app.optimizer import Bounds, OcpProblem, TrackingTargets, adjoint_residual_study, dot_product_test
from app.potentials import MobilityKind, PotentialKind
from app.sensitivity import adjoint_sweep, continuous_adjoint_residual, reverse, tangent_run
from app.sensitivity.residual import TERMS, interior_margin
from app.solver import Trajectory, run_forward
from app.utils.patterns import vortex_field
from conftest import cosine_phase, make_model, small_config

N_STEPS = 5
DT = 1e-4


def _forward(model, U):
    phi0 = cosine_phase(model.grid) + 0.05 * np.sin(3 * np.pi * model.grid.centers()[0])
    fwd = run_forward(model, phi0, N_STEPS, DT, forcing=U, keep_trajectory=True, method="direct")
    return phi0, fwd


def _control(model, amplitude=0.5):
    return np.broadcast_to(vortex_field(model.grid, amplitude), (N_STEPS, 2) + model.grid.shape).copy()


@pytest.fixture(scope="module", params=["log", "obstacle"])
def model(request):
    if request.param == "log":
        return make_model()
    return make_model(potential=PotentialKind.DOUBLE_OBSTACLE, mobility=MobilityKind.CUTOFF)


def test_tangent_of_zero_is_zero(model):
    _, fwd = _forward(model, _control(model))
    tan = tangent_run(model, fwd.trajectory, np.zeros((N_STEPS, 2) + model.grid.shape))
    assert not np.any(tan.psi) and not np.any(tan.w)
    fwd.trajectory.close()


def test_tangent_is_linear(model, rng):
    _, fwd = _forward(model, _control(model))
    dU = rng.standard_normal((N_STEPS, 2) + model.grid.shape)
    psi0 = rng.standard_normal(model.grid.shape)
    one = tangent_run(model, fwd.trajectory, dU, psi0)
    two = tangent_run(model, fwd.trajectory, 2 * dU, 2 * psi0)
    assert np.allclose(two.psi, 2 * one.psi, rtol=1e-12, atol=1e-12 * np.max(np.abs(one.psi)))
    fwd.trajectory.close()


def test_tangent_matches_finite_differences(model):
    U = _control(model)
    phi0, fwd = _forward(model, U)
    x, y = model.grid.centers()
    dU = np.broadcast_to(np.stack([np.sin(np.pi * y) * x, np.cos(np.pi * x) * y]),
                         (N_STEPS, 2) + model.grid.shape).copy()
    tan = tangent_run(model, fwd.trajectory, dU)
    fwd.trajectory.close()

    errors = []
    for eps in (1e-3, 1e-4):
        pert = run_forward(model, phi0, N_STEPS, DT, forcing=U + eps * dU, method="direct")
        fd = (pert.final.phi - fwd.final.phi) / eps
        errors.append(np.max(np.abs(fd - tan.psi[-1])))
    assert errors[1] < errors[0] / 5


def test_dot_product_identity(model, rng):
    _, fwd = _forward(model, _control(model))
    traj = fwd.trajectory
    grid = model.grid
    for _ in range(3):
        dU = rng.standard_normal((N_STEPS, 2) + grid.shape)
        psi0 = rng.standard_normal(grid.shape)
        rho = rng.standard_normal((N_STEPS + 1,) + grid.shape)
        sigma = rng.standard_normal((N_STEPS, 2) + grid.shape)
        tan = tangent_run(model, traj, dU, psi0)
        adj = reverse(model, traj, rho, sigma)
        lhs = np.sum(rho * tan.psi) + np.sum(sigma * tan.w)
        rhs = np.sum(adj.xi[0] * psi0) + np.sum(adj.y * dU)
        assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), abs(rhs))
    traj.close()


def test_dot_product_report(log_model):
    U = _control(log_model)
    phi0, fwd = _forward(log_model, U)
    targets = TrackingTargets.from_series(fwd.trajectory.phi_series(), fwd.trajectory.u_series())
    fwd.trajectory.close()
    problem = OcpProblem(model=log_model, phi0=phi0, n_steps=N_STEPS, dt=DT, targets=targets,
                         bounds=Bounds.box(log_model.grid, (-1, -1), (1, 1)))
    report = dot_product_test(problem, U, seeds=[0, 1], tolerance=1e-10)
    assert report.passed
    assert [r.epsilon_or_seed for r in report.rows] == [0.0, 1.0]


def test_adjoint_vanishes_when_targets_are_met(log_model):
    _, fwd = _forward(log_model, _control(log_model))
    traj = fwd.trajectory
    targets = TrackingTargets.from_series(traj.phi_series(), traj.u_series())
    adj = adjoint_sweep(log_model, traj, targets)
    assert not np.any(adj.xi) and not np.any(adj.y)
    report = continuous_adjoint_residual(log_model, traj, adj, targets)
    assert report.printed == 0.0
    assert report.per_step_printed == [0.0] * N_STEPS
    traj.close()


@pytest.mark.parametrize("n, margin", [(8, 2), (16, 2), (32, 4), (64, 8)])
def test_residual_margin_is_a_fixed_fraction_of_the_domain(n, margin):
    assert interior_margin(Grid2D(n, n)) == (margin, margin)


def test_adjoint_residual_reports_every_step(log_model):
    _, fwd = _forward(log_model, _control(log_model))
    traj = fwd.trajectory
    zero = TrackingTargets.from_series(np.zeros_like(traj.phi_series()), np.zeros_like(traj.u_series()))
    adj = adjoint_sweep(log_model, traj, zero)
    report = continuous_adjoint_residual(log_model, traj, adj, zero)
    traj.close()
    assert len(report.per_step_printed) == N_STEPS
    assert np.all(np.isfinite(report.per_step_printed))
    assert report.printed == max(report.per_step_printed) > 0.0
    assert set(report.term_norms) == set(TERMS)
    assert report.margin == [2, 2]


def test_terminal_slice_is_exact(log_model, rng):
    _, fwd = _forward(log_model, _control(log_model))
    traj = fwd.trajectory
    phi = traj.phi_series()
    targets = TrackingTargets(phi_d=phi, u_d=traj.u_series(),
                              phi_omega=phi[-1] + rng.standard_normal(phi[-1].shape))
    adj = adjoint_sweep(log_model, traj, targets)
    assert np.array_equal(adj.xi[N_STEPS], phi[-1] - targets.phi_omega)
    assert adj.v.shape == (N_STEPS, 2) + log_model.grid.shape
    assert np.any(adj.v)
    traj.close()


def test_reverse_source_shapes(log_model):
    _, fwd = _forward(log_model, None)
    grid = log_model.grid
    with pytest.raises(ConfigError):
        reverse(log_model, fwd.trajectory, np.zeros((N_STEPS,) + grid.shape), np.zeros((N_STEPS, 2) + grid.shape))
    fwd.trajectory.close()


def test_adjoint_needs_complete_trajectory(log_model):
    grid = log_model.grid
    traj = Trajectory(grid, DT, 2)
    traj.store("phi", 0, np.zeros(grid.shape))
    targets = TrackingTargets(phi_d=np.zeros((3,) + grid.shape), u_d=np.zeros((2, 2) + grid.shape),
                              phi_omega=np.zeros(grid.shape))
    with pytest.raises(StateError):
        adjoint_sweep(log_model, traj, targets)


@pytest.mark.slow
@pytest.mark.parametrize("potential,mobility", [
    (PotentialKind.LOGARITHMIC, MobilityKind.DEGENERATE),
    (PotentialKind.DOUBLE_OBSTACLE, MobilityKind.CUTOFF),
])
def test_dot_product_acceptance(potential, mobility):
    model = make_model(n=32, potential=potential, mobility=mobility)
    grid = model.grid
    phi0 = cosine_phase(grid)
    U = np.broadcast_to(vortex_field(grid, 0.5), (20, 2) + grid.shape).copy()
    fwd = run_forward(model, phi0, 20, DT, forcing=U, keep_trajectory=True, method="direct")
    targets = TrackingTargets.from_series(fwd.trajectory.phi_series(), fwd.trajectory.u_series())
    fwd.trajectory.close()
    problem = OcpProblem(model=model, phi0=phi0, n_steps=20, dt=DT, targets=targets,
                         bounds=Bounds.box(grid, (-1, -1), (1, 1)))
    report = dot_product_test(problem, U, seeds=range(10), tolerance=1e-10)
    assert report.passed, report.max_rel_err


@pytest.mark.slow
def test_adjoint_residual_converges_under_refinement():
    # 16 -> 32 -> 64 cells with dt halved at each level
    rows = adjoint_residual_study(small_config(time={"T": 4e-4, "dt": 1e-4}), levels=3)
    assert [r["nx"] for r in rows] == [16, 32, 64]
    residuals = [r["printed"] for r in rows]
    assert residuals[0] > residuals[1] > residuals[2]
    assert rows[1]["order_printed"] >= 0.9
    assert rows[2]["order_printed"] >= 0.9
