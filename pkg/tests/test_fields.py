import numpy as np
import pytest

from app.errors import ConfigError, DomainError
from app.fields import Grid2D, divergence, gradient, grid_operators, variable_coefficient_laplacian


def test_grid_geometry():
    grid = Grid2D(8, 4, lx=2.0, ly=1.0)
    assert grid.hx == 0.25 and grid.hy == 0.25
    assert grid.shape == (8, 4)
    x, y = grid.centers()
    assert x.shape == (8, 4)
    assert x[0, 0] == pytest.approx(0.125)
    assert y[0, -1] == pytest.approx(0.875)
    assert grid.refined().shape == (16, 8)


@pytest.mark.parametrize("nx,ny", [(3, 8), (8, 2)])
def test_grid_too_small(nx, ny):
    with pytest.raises(ConfigError):
        Grid2D(nx, ny)


def test_shape_checks(grid16):
    with pytest.raises(ConfigError):
        gradient(grid16, np.zeros((16, 15)))
    with pytest.raises(ConfigError):
        divergence(grid16, np.zeros((16, 16)))


def test_summation_by_parts(grid16, rng):
    f = rng.standard_normal(grid16.shape)
    v = rng.standard_normal((2,) + grid16.shape)
    gv = gradient(grid16, f) * v
    fd = f * divergence(grid16, v, closure="no_slip")
    assert abs(np.sum(gv) + np.sum(fd)) <= 1e-12 * np.sum(np.abs(gv))


def test_gradient_of_constant_vanishes(grid16):
    assert np.all(gradient(grid16, np.full(grid16.shape, 0.7)) == 0.0)


def test_open_divergence_of_linear_field(grid16):
    x, y = grid16.centers()
    v = np.stack([x, y])
    assert np.allclose(divergence(grid16, v), 2.0, atol=1e-12)


def test_gradient_of_linear_field_interior(grid16):
    x, y = grid16.centers()
    g = gradient(grid16, 3.0 * x - y)
    assert np.allclose(g[0, 1:-1, :], 3.0, atol=1e-12)
    assert np.allclose(g[1, :, 1:-1], -1.0, atol=1e-12)


def test_laplacian_symmetric_and_conservative(grid16, rng):
    c = 1.0 + rng.uniform(size=grid16.shape)
    mat = grid_operators(grid16).laplacian_matrix(c)
    assert abs(mat - mat.T).max() <= 1e-12 * abs(mat).max()
    assert np.allclose(np.asarray(mat.sum(axis=0)).ravel(), 0.0, atol=1e-9)


def test_laplacian_negative_semidefinite(grid16, rng):
    c = 0.5 + rng.uniform(size=grid16.shape)
    f = rng.standard_normal(grid16.shape)
    assert np.sum(f * variable_coefficient_laplacian(grid16, c, f)) <= 0.0


def test_negative_coefficient_rejected(grid16):
    c = np.ones(grid16.shape)
    c[3, 3] = -0.1
    with pytest.raises(DomainError):
        variable_coefficient_laplacian(grid16, c, np.zeros(grid16.shape))


def test_coefficient_action_is_exact_derivative(grid16, rng):
    ops = grid_operators(grid16)
    c = 1.0 + rng.uniform(size=grid16.shape)
    dc = rng.standard_normal(grid16.shape)
    phi = rng.standard_normal(grid16.shape)
    # L(c) phi is linear in c
    diff = (ops.laplacian_matrix(c + dc) - ops.laplacian_matrix(c)) @ phi.ravel()
    assert np.allclose(diff.reshape(grid16.shape), ops.coefficient_action(phi, dc), atol=1e-9)


def test_coefficient_action_transpose(grid16, rng):
    ops = grid_operators(grid16)
    phi = rng.standard_normal(grid16.shape)
    dc = rng.standard_normal(grid16.shape)
    z = rng.standard_normal(grid16.shape)
    lhs = z * ops.coefficient_action(phi, dc)
    rhs = dc * ops.coefficient_action_transpose(phi, z)
    assert abs(np.sum(lhs) - np.sum(rhs)) <= 1e-12 * np.sum(np.abs(lhs))


def _cosine_mode(grid):
    x, y = grid.centers()
    f = np.cos(np.pi * x) * np.cos(np.pi * y)
    grad = np.stack([-np.pi * np.sin(np.pi * x) * np.cos(np.pi * y),
                     -np.pi * np.cos(np.pi * x) * np.sin(np.pi * y)])
    return f, grad, -2 * np.pi**2 * f


def _refinement_ratio(error, coarse=32):
    return error(Grid2D(coarse, coarse)) / error(Grid2D(2 * coarse, 2 * coarse))


def test_gradient_converges_at_second_order():
    def error(grid):
        f, exact, _ = _cosine_mode(grid)
        return grid.norm(gradient(grid, f) - exact)

    assert _refinement_ratio(error) == pytest.approx(4.0, abs=0.2)


def test_gradient_wall_cells_keep_second_order():
    # cos(pi x) has zero normal derivative, so the mirrored wall row stays accurate
    def error(grid):
        f, exact, _ = _cosine_mode(grid)
        g = gradient(grid, f)
        return float(np.max(np.abs(g[0, [0, -1], :] - exact[0, [0, -1], :])))

    assert _refinement_ratio(error) >= 3.8


def test_laplacian_matrix_converges_at_second_order():
    def error(grid):
        f, _, lap = _cosine_mode(grid)
        out = grid_operators(grid).laplacian_matrix(np.ones(grid.shape)) @ f.ravel()
        return grid.norm(out.reshape(grid.shape) - lap)

    assert _refinement_ratio(error) == pytest.approx(4.0, abs=0.2)


@pytest.mark.parametrize("closure", ["open", "no_slip"])
def test_divergence_of_gradient_approximates_laplacian(closure):
    def error(grid):
        f, _, lap = _cosine_mode(grid)
        return grid.norm(divergence(grid, gradient(grid, f), closure=closure) - lap)

    assert _refinement_ratio(error) == pytest.approx(4.0, abs=0.4)
