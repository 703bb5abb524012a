import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from contactflow.core import (TimeDependentHamiltonian, constant_hamiltonian, contact_vector_field,
                              defining_residuals, is_basic, linear_combination, pullback_residual,
                              reeb_derivative, reeb_field)
from contactflow.flow import IntegratorConfig, flow_map, identity_flow
from contactflow.presets import bump_hamiltonian, coordinate_hamiltonian
from contactflow.transforms import dilation, transform_pullback_residual


def z_hamiltonian(dim=3):
    e = np.zeros(dim)
    e[-1] = 1.0
    return TimeDependentHamiltonian(lambda t, X: X[:, -1].copy(), lambda t, X: np.broadcast_to(e, X.shape),
                                    autonomous=True, name="z")


def test_reeb_field_heisenberg(heis, rng):
    X = heis.random_points(rng, 50)
    np.testing.assert_allclose(reeb_field(heis, X), np.tile([0.0, 0.0, 1.0], (50, 1)), atol=1e-12)


def test_alpha_of_reeb_is_one(heis2, torus, rng):
    for chart in (heis2, torus):
        X = chart.random_points(rng, 30)
        assert np.abs(np.einsum("ni,ni->n", chart.alpha_at(X), reeb_field(chart, X)) - 1).max() < 1e-10


def test_contact_field_of_constant_is_reeb(heis, torus, rng):
    for chart in (heis, torus):
        X = chart.random_points(rng, 20)
        np.testing.assert_allclose(contact_vector_field(chart, constant_hamiltonian(1.0), 0.0, X),
                                   reeb_field(chart, X), atol=1e-12)
    X = torus.random_points(rng, 20)
    np.testing.assert_allclose(contact_vector_field(torus, constant_hamiltonian(2.5), 0.0, X),
                               2.5 * reeb_field(torus, X), atol=1e-12)


@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_contact_field_of_x(x, y, z):
    from contactflow.charts import standard_heisenberg

    chart = standard_heisenberg(1)
    X = contact_vector_field(chart, coordinate_hamiltonian(0), 0.0, np.array([x, y, z]))
    np.testing.assert_allclose(X, [0.0, -1.0, x / 2], atol=1e-12)


@pytest.mark.parametrize("H, expected", [(constant_hamiltonian(3.0), 0.0), (z_hamiltonian(), 1.0),
                                         (coordinate_hamiltonian(0), 0.0)])
def test_reeb_derivative(heis, rng, H, expected):
    X = heis.random_points(rng, 10)
    np.testing.assert_allclose(reeb_derivative(heis, H, 0.0, X), expected, atol=1e-12)


def test_is_basic(heis):
    grid = heis.grid(4)
    assert is_basic(heis, coordinate_hamiltonian(0), grid)
    assert not is_basic(heis, z_hamiltonian(), grid)
    assert is_basic(heis, constant_hamiltonian(0.0), grid)


def oscillating(dim):
    def value(t, X):
        return np.sin(X[:, 0] + 2 * t) * X[:, -1] + 0.3 * np.cos(X[:, 1] - X[:, -1]) + t * X[:, 0] ** 2

    return TimeDependentHamiltonian(value, name="osc")


@pytest.mark.parametrize("which", ["heis1", "heis2", "torus"])
def test_defining_residuals_fd_gradient(which, heis, heis2, torus, rng):
    chart = {"heis1": heis, "heis2": heis2, "torus": torus}[which]
    X = chart.random_points(rng, 200)
    first, second = defining_residuals(chart, oscillating(chart.dim), 0.4, X)
    assert first < 1e-9 and second < 1e-9


def test_linearity(heis, rng):
    X = heis.random_points(rng, 40, margin=0.5)
    H = bump_hamiltonian((0, 0, 0), 1.5, z_offset=0.2)
    F = coordinate_hamiltonian(0)
    combo = linear_combination([(2.0, H), (-0.5, F)])
    lhs = contact_vector_field(heis, combo, 0.0, X)
    rhs = 2.0 * contact_vector_field(heis, H, 0.0, X) - 0.5 * contact_vector_field(heis, F, 0.0, X)
    assert np.abs(lhs - rhs).max() < 1e-9


def test_hamiltonian_gradient_matches_fd(heis, rng):
    H = bump_hamiltonian((0.1, 0, 0), 1.4, 2.0, z_offset=0.3, time_rate=0.5)
    X = heis.random_points(rng, 100, margin=0.5)
    h = H.fd_step
    assert np.abs(H.gradient(0.7, X) - H.fd_gradient(0.7, X)).max() < 10 * h * h * 1e3


def test_support_is_respected(heis, rng):
    H = bump_hamiltonian((0.2, 0, 0), 0.5)
    lo, hi = H.support
    shell = rng.uniform(-1, 1, (200, 3))
    shell = np.where(np.abs(shell) < 0.5, np.sign(shell) * 0.75, shell) + 0.0
    outside = shell[~H.active_mask(shell)]
    assert len(outside) > 0
    assert np.all(H(0.0, outside) == 0.0)


def test_pullback_residual_identity(heis, rng):
    X = heis.random_points(rng, 10, margin=0.5)
    assert pullback_residual(heis, identity_flow(heis), None, 1.0, X).max() < 1e-9


def test_pullback_residual_reeb(heis):
    fm = flow_map(heis, constant_hamiltonian(1.0), IntegratorConfig(step=1e-3))
    X = heis.grid(3, margin=1.2)
    assert pullback_residual(heis, fm, None, 0.5, X).max() < 1e-6


def test_pullback_residual_dilation(heis, rng):
    X = rng.uniform(-0.5, 0.5, (20, 3))
    assert transform_pullback_residual(heis, dilation(1.5), X, fd_step=1e-4).max() < 1e-8


def test_constant_hamiltonian_zero_flag():
    assert constant_hamiltonian(0.0).is_zero
    assert not constant_hamiltonian(1.0).is_zero


def test_hamiltonian_arithmetic(heis, rng):
    X = heis.random_points(rng, 5)
    H, F = coordinate_hamiltonian(0), z_hamiltonian()
    np.testing.assert_allclose((H + F)(0.0, X), X[:, 0] + X[:, 2])
    np.testing.assert_allclose((H - F)(0.0, X), X[:, 0] - X[:, 2])
    np.testing.assert_allclose((3.0 * H)(0.0, X), 3 * X[:, 0])
    np.testing.assert_allclose((-H)(0.0, X), -X[:, 0])
