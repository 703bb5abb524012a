import numpy as np
import pytest

from contactflow.core import constant_hamiltonian
from contactflow.errors import ThetaCapExceeded
from contactflow.flow import IntegratorConfig, generate_system
from contactflow.norms import hofer_length
from contactflow.presets import bump_hamiltonian, coordinate_hamiltonian
from contactflow.symplectization import (SYMPLECTIC_SIGN, lift_discrepancy, lift_hamiltonian, omega_matrix,
                                         symplectic_flow, symplectic_vector_field, verify_lift)

CFG = IntegratorConfig(step=1e-2)


def samples(rng, n=10, margin=0.5, theta=1.0):
    return np.concatenate([rng.uniform(-2 + margin, 2 - margin, (n, 3)), rng.uniform(-theta, theta, (n, 1))], axis=1)


def test_sign_is_recorded():
    assert SYMPLECTIC_SIGN in (1, -1)
    assert SYMPLECTIC_SIGN == 1


def test_lift_examples(rng):
    H = bump_hamiltonian((0, 0, 0), 1.2, z_offset=0.3)
    Hhat = lift_hamiltonian(H)
    Z = samples(rng)
    Z0 = Z.copy()
    Z0[:, -1] = 0.0
    np.testing.assert_array_equal(Hhat(0.0, Z0), H(0.0, Z0[:, :-1]))
    np.testing.assert_allclose(lift_hamiltonian(constant_hamiltonian(1.0))(0.0, Z), np.exp(Z[:, -1]))
    g = Hhat.gradient(0.0, Z)
    np.testing.assert_allclose(g[:, -1], Hhat(0.0, Z), rtol=1e-14)
    h = 1e-5
    E = np.zeros(4)
    E[-1] = h
    np.testing.assert_allclose(g[:, -1], (Hhat(0.0, Z + E) - Hhat(0.0, Z - E)) / (2 * h), rtol=1e-8)


def test_omega_is_antisymmetric_and_closed(heis, rng):
    Z = samples(rng, 5)
    W = omega_matrix(heis, Z)
    assert np.abs(W + np.swapaxes(W, 1, 2)).max() < 1e-12
    h = 1e-4
    d = 4
    for z in Z:
        dW = np.stack([(omega_matrix(heis, z + h * e) - omega_matrix(heis, z - h * e)) / (2 * h) for e in np.eye(d)])
        # (d omega)_{ijk} = d_i W_jk + d_j W_ki + d_k W_ij
        closed = dW + np.transpose(dW, (1, 2, 0)) + np.transpose(dW, (2, 0, 1))
        assert np.abs(closed).max() < 1e-6


def test_zero_hamiltonian_is_stationary(heis):
    ts, Z = symplectic_flow(heis, constant_hamiltonian(0.0), [0.1, 0.2, 0.3, 0.4], 1.0, CFG)
    np.testing.assert_array_equal(Z, np.tile([0.1, 0.2, 0.3, 0.4], (len(ts), 1)))


def test_reeb_lift(heis):
    ts, Z = symplectic_flow(heis, constant_hamiltonian(1.0), [0.1, 0.2, 0.3, 0.0], 1.0, CFG)
    np.testing.assert_allclose(Z[-1], [0.1, 0.2, 1.3, 0.0], atol=1e-12)
    assert np.abs(Z[:, -1]).max() < 1e-12


def test_coordinate_lift(heis):
    ts, Z = symplectic_flow(heis, coordinate_hamiltonian(0), [1.0, 0.0, 0.0, 0.0], 1.0, CFG)
    np.testing.assert_allclose(Z[:, :3], np.stack([np.ones_like(ts), -ts, ts / 2], 1), atol=1e-12)
    assert np.abs(Z[:, -1]).max() < 1e-12


def test_verify_lift_trivial_cases(heis, rng):
    Z = samples(rng, 5)
    assert verify_lift(generate_system(heis, constant_hamiltonian(0.0), CFG), Z) == 0.0
    Z[:, 2] = rng.uniform(-0.5, 0.5, 5)
    assert verify_lift(generate_system(heis, constant_hamiltonian(1.0), CFG), Z, (0.5, 1.0)) < 1e-6


def test_lift_identity_with_theta_drift(heis, rng):
    sys = generate_system(heis, bump_hamiltonian((0, 0, 0), 1.2, z_offset=0.3, time_rate=1.0), CFG)
    Z = samples(rng, 10)
    d = lift_discrepancy(sys, Z, [0.5, 1.0])
    assert d.shape == (2, 10) and d.max() < 1e-5
    _, h = sys.flow.evaluate(1.0, Z[:, :-1])
    assert np.abs(h).max() > 1e-2


def test_theta_cap(heis):
    with pytest.raises(ThetaCapExceeded):
        symplectic_flow(heis, constant_hamiltonian(1.0), [0.0, 0.0, 0.0, 6.0], 0.1, CFG)
    with pytest.raises(ThetaCapExceeded):
        symplectic_flow(heis, bump_hamiltonian((0, 0, 0), 1.5, 3.0, z_offset=1.0), [0.0, 0.0, 0.5, 0.0], 1.0, CFG,
                        cap=0.1)


def test_lifted_energy_conservation(heis):
    H = bump_hamiltonian((0, 0, 0), 1.2, z_offset=0.3)
    Hhat = lift_hamiltonian(H)
    ts, Z = symplectic_flow(heis, H, [0.2, -0.1, 0.1, 0.3], 1.0, CFG)
    E = Hhat(0.0, Z)
    assert np.abs(E - E[0]).max() < 1e-6


def test_vector_field_solves_omega(heis, rng):
    Hhat = lift_hamiltonian(bump_hamiltonian((0, 0, 0), 1.2, z_offset=0.3))
    Z = samples(rng, 8)
    Xhat = symplectic_vector_field(heis, Hhat, 0.0, Z)
    lhs = np.einsum("ni,nij->nj", Xhat, omega_matrix(heis, Z))
    assert np.abs(lhs - SYMPLECTIC_SIGN * Hhat.gradient(0.0, Z)).max() < 1e-10


def test_hofer_length_examples(heis):
    X = heis.grid(9)
    t = np.linspace(0, 1, 5)
    assert hofer_length(lambda t, X: np.full(len(X), 2.0), t, X) == 0.0
    H = bump_hamiltonian((0, 0, 0), 1.5, 0.7)
    assert hofer_length(H, t, X) == pytest.approx(0.7, rel=1e-12)
    assert hofer_length(lambda t, X: 3.0 * H(t, X), t, X) == pytest.approx(2.1, rel=1e-12)
