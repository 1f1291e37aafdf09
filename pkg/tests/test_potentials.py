import numpy as np
import pytest

from app.errors import ConfigError, DomainError
from app.potentials import (
    MobilityKind,
    MobilitySpec,
    OperatorTables,
    PotentialKind,
    PotentialSpec,
    beta_do,
    eval_b_B,
    eval_beta_do,
    eval_lambda,
    eval_potential,
)

DELTAS = [0.1, 0.05, 0.025, 0.0125]


def _scale(f, point, order, width):
    window = np.linspace(point - width, point + width, 11)
    return max(1.0, float(np.max(np.abs(f(window, order)))))


def _one_sided(f, point, order):
    left = f(np.array([np.nextafter(point, -np.inf)]), order)[0]
    right = f(np.array([np.nextafter(point, np.inf)]), order)[0]
    return left, right


def _central(f, r, order, h=1e-6):
    return (f(r + h, order) - f(r - h, order)) / (2 * h)


def test_double_obstacle_regularization_exact_inside():
    spec = PotentialSpec(PotentialKind.DOUBLE_OBSTACLE, delta=0.05)
    r = np.linspace(-1.0, 1.0, 2001)
    assert np.max(np.abs(eval_potential(spec, r) - eval_potential(spec, r, regularized=False))) == 0.0
    assert np.all(eval_beta_do(0.05, r) == 0.0)


def test_double_obstacle_unregularized_is_infinite_outside():
    spec = PotentialSpec(PotentialKind.DOUBLE_OBSTACLE)
    vals = eval_potential(spec, np.array([-1.01, 1.5]), regularized=False)
    assert np.all(np.isinf(vals))


def test_log_regularization_converges_monotonically():
    r = np.linspace(-0.99, 0.99, 4001)
    sups = []
    for delta in DELTAS:
        spec = PotentialSpec(PotentialKind.LOGARITHMIC, theta=0.1, theta_c=0.2, delta=delta)
        sups.append(np.max(np.abs(eval_potential(spec, r) - eval_potential(spec, r, regularized=False))))
    assert all(a > b for a, b in zip(sups, sups[1:]))
    assert sups[-1] > 0


def test_log_potential_outside_domain():
    spec = PotentialSpec(PotentialKind.LOGARITHMIC)
    with pytest.raises(DomainError):
        eval_potential(spec, np.array([0.5, 1.0]), regularized=False)
    # the regularized one extends to the whole line
    assert np.all(np.isfinite(eval_potential(spec, np.array([-3.0, 1.0, 3.0]))))


@pytest.mark.parametrize("delta", DELTAS)
@pytest.mark.parametrize("point_of", [lambda d: 1.0, lambda d: 1.0 + d, lambda d: -1.0, lambda d: -1.0 - d])
def test_beta_do_is_c3_at_breakpoints(delta, point_of):
    point = point_of(delta)
    for order in range(4):
        f = lambda r, k: beta_do(delta, r, k)  # noqa: E731
        left, right = _one_sided(f, point, order)
        assert abs(left - right) <= 1e-9 * _scale(f, point, order, delta)


@pytest.mark.parametrize("delta", DELTAS)
def test_log_regularization_is_c3_at_breakpoints(delta):
    spec = PotentialSpec(PotentialKind.LOGARITHMIC, delta=delta)
    for point in (1 - delta, -(1 - delta)):
        for order in range(4):
            left, right = _one_sided(spec.singular, point, order)
            assert abs(left - right) <= 1e-9 * _scale(spec.singular, point, order, delta)


@pytest.mark.parametrize("kind,points", [
    (PotentialKind.DOUBLE_OBSTACLE, [-1.2, -1.03, 0.4, 1.02, 1.3]),
    (PotentialKind.LOGARITHMIC, [-0.98, -0.3, 0.5, 0.97, 1.4]),
    (PotentialKind.POLYNOMIAL, [-1.5, 0.2, 0.9]),
])
def test_derivatives_match_finite_differences(kind, points):
    spec = PotentialSpec(kind, delta=0.05)
    r = np.array(points)
    for order in range(3):
        fd = _central(spec, r, order)
        exact = spec(r, order + 1)
        assert np.allclose(fd, exact, rtol=1e-5, atol=1e-5)


def test_polynomial_values():
    spec = PotentialSpec(PotentialKind.POLYNOMIAL)
    assert np.allclose(eval_potential(spec, np.array([-1.0, 0.0, 1.0])), [0.0, 0.25, 0.0])
    assert spec(np.array([0.5]), 2)[0] == pytest.approx(3 * 0.25 - 1)


@pytest.mark.parametrize("delta", [0.0, 0.6])
def test_delta_range(delta):
    with pytest.raises(ConfigError):
        PotentialSpec(PotentialKind.LOGARITHMIC, delta=delta)
    with pytest.raises(ConfigError):
        eval_beta_do(delta, np.zeros(3))


def test_degenerate_mobility():
    mob = MobilitySpec(MobilityKind.DEGENERATE)
    assert np.all(mob(np.array([-1.0, 1.0, -2.0, 2.0])) == 0.0)
    assert mob(np.array([0.5]))[0] == pytest.approx(0.75)
    assert np.allclose(mob.derivative(np.array([0.5, 2.0])), [-1.0, 0.0])


def test_cutoff_mobility_is_bounded_below():
    mob = MobilitySpec(MobilityKind.CUTOFF, eps=0.9)
    s = np.linspace(-2, 2, 401)
    assert np.min(mob(s)) == pytest.approx(1 - 0.81)
    with pytest.raises(ConfigError):
        MobilitySpec(MobilityKind.CUTOFF, eps=1.0)


@pytest.mark.parametrize("kind", list(MobilityKind))
def test_mobility_primitive_derivative(kind):
    mob = MobilitySpec(kind, eps=0.9, m0=2.0)
    s = np.array([-1.5, -0.95, -0.2, 0.4, 0.95, 1.3])
    fd = (mob.primitive(s + 1e-6) - mob.primitive(s - 1e-6)) / 2e-6
    assert np.allclose(fd, mob(s), atol=1e-7)
    assert mob.primitive(np.array([0.0]))[0] == 0.0


def test_lambda_compatibility_log_degenerate():
    ot = OperatorTables(PotentialSpec(PotentialKind.LOGARITHMIC, theta=0.1, theta_c=0.2),
                        MobilitySpec(MobilityKind.DEGENERATE))
    s = np.random.default_rng(7).uniform(-1.0, 1.0, 10_000)
    s = np.concatenate([s, [-1.0, 1.0]])
    singular = eval_lambda(ot, s, "singular", regularized=False)
    assert np.max(np.abs(singular - 0.1)) <= 1e-13
    full = eval_lambda(ot, s, regularized=False)
    smooth = eval_lambda(ot, s, "smooth")
    assert np.max(np.abs(full - smooth - 0.1)) <= 1e-13


def test_lambda_derivative_matches_finite_difference():
    ot = OperatorTables(PotentialSpec(PotentialKind.LOGARITHMIC), MobilitySpec(MobilityKind.DEGENERATE))
    s = np.array([-0.9, -0.4, 0.1, 0.6, 0.97])
    fd = (ot.lam(s + 1e-6) - ot.lam(s - 1e-6)) / 2e-6
    assert np.allclose(fd, ot.dlam(s), rtol=1e-5, atol=1e-6)


def test_primitives_closed_form():
    theta, theta_c = 0.1, 0.2
    ot = OperatorTables(PotentialSpec(PotentialKind.LOGARITHMIC, theta=theta, theta_c=theta_c),
                        MobilitySpec(MobilityKind.DEGENERATE))
    b, B = eval_b_B(ot, 0.5, "singular", regularized=False)
    assert float(b) == pytest.approx(0.5 - 0.125 / 3, abs=1e-15)
    assert B == pytest.approx(theta * 0.5, abs=1e-12)
    s = np.array([-0.7, 0.0, 0.3])
    expected = theta * s - theta_c * (s - s**3 / 3)
    assert np.allclose(ot.B(s, regularized=False), expected, atol=1e-12)


def test_b_tilde_and_coefficient():
    ot = OperatorTables(PotentialSpec(PotentialKind.DOUBLE_OBSTACLE), MobilitySpec(MobilityKind.CUTOFF))
    s, a = np.array([0.3]), 2.0
    assert ot.coefficient(s, a)[0] == pytest.approx(ot.m(s)[0] * a + ot.lam(s)[0])
    assert ot.b_tilde(0.3, a) == pytest.approx(ot.B(0.3) + a * float(ot.b(0.3)))
    # lambda = m (1 - 2) inside [-1, 1] for the double obstacle
    assert ot.B(0.3) == pytest.approx(-(0.3 - 0.009), abs=1e-12)
