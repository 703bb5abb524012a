import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from contactflow.algebra import compose, invert, recover_hamiltonian, reparameterize, transform
from contactflow.core import constant_hamiltonian
from contactflow.flow import IntegratorConfig, c0_distance, generate_system, inverse_flow
from contactflow.heisenberg import right_translation
from contactflow.norms import contact_norm, hofer_length, uniform_norm
from contactflow.presets import bump_hamiltonian, coordinate_hamiltonian
from contactflow.transforms import dilation, identity_transform

CFG = IntegratorConfig(step=1e-2)
COARSE = IntegratorConfig(step=5e-2)


def gentle(center=(0, 0, 0), z_offset=0.2, time_rate=0.0):
    return bump_hamiltonian(center, 1.0, 0.2, z_offset=z_offset, time_rate=time_rate, profile="polynomial")


def test_compose_constants(heis, rng):
    A = generate_system(heis, constant_hamiltonian(1.0), COARSE)
    AB = compose(A, generate_system(heis, constant_hamiltonian(1.0), COARSE))
    X = rng.uniform(-0.5, 0.5, (5, 3))
    np.testing.assert_allclose(AB.hamiltonian(0.4, X), 2.0, atol=1e-12)
    p, h = AB.flow.evaluate(0.5, X)
    np.testing.assert_allclose(p, X + [0.0, 0.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(h, 0.0, atol=1e-12)


def test_compose_with_zero_is_identity(heis):
    A = generate_system(heis, gentle(), CFG)
    assert compose(A, generate_system(heis, constant_hamiltonian(0.0), CFG)) is A


def test_compose_coordinate_with_reeb(heis, rng):
    A = generate_system(heis, coordinate_hamiltonian(0), CFG)
    AB = compose(A, generate_system(heis, constant_hamiltonian(1.0), CFG))
    X = rng.uniform(-1, 1, (6, 3))
    np.testing.assert_allclose(AB.hamiltonian(0.6, X), X[:, 0] + 1.0, atol=1e-10)


def test_compose_flow_and_conformal_match_pointwise(heis):
    A = generate_system(heis, gentle(), COARSE)
    B = generate_system(heis, gentle((0.3, 0, 0), None, 1.0), COARSE)
    AB = compose(A, B)
    X = heis.grid(3, margin=1.0)
    t = [0.5, 1.0]
    assert c0_distance(AB.flow, AB.meta["pointwise"], t, X, include_inverse=False) < 1e-5
    _, h = AB.flow.evaluate(1.0, X)
    assert np.abs(AB.conformal(1.0, X) - h).max() < 1e-5


def test_invert_is_inverse_flow(heis, rng):
    sys = generate_system(heis, gentle(), COARSE)
    X = rng.uniform(-1, 1, (4, 3))
    a, b = invert(sys), inverse_flow(sys)
    np.testing.assert_array_equal(a.hamiltonian(0.5, X), b.hamiltonian(0.5, X))
    np.testing.assert_array_equal(invert(generate_system(heis, constant_hamiltonian(2.0))).hamiltonian(0.3, X), -2.0)


def test_group_inverse_axioms(heis, rng):
    sys = generate_system(heis, gentle(), COARSE)
    X = rng.uniform(-0.8, 0.8, (8, 3))
    prod = compose(sys, invert(sys))
    assert np.abs(prod.hamiltonian(0.7, X)).max() < 1e-6
    twice = invert(invert(sys))
    assert np.abs(twice.hamiltonian(0.7, X) - sys.hamiltonian(0.7, X)).max() < 1e-6


def test_transform_identity(heis, rng):
    sys = generate_system(heis, gentle(), CFG)
    T = transform(sys, identity_transform())
    X = rng.uniform(-0.8, 0.8, (8, 3))
    np.testing.assert_array_equal(T.hamiltonian(0.3, X), sys.hamiltonian(0.3, X))
    np.testing.assert_allclose(T.conformal(0.5, X), sys.conformal(0.5, X), atol=1e-14)


@pytest.mark.parametrize("lam", [1.25, 2.0, 3.0])
def test_dilation_of_reeb(heis, rng, lam):
    T = transform(generate_system(heis, constant_hamiltonian(1.0), CFG), dilation(lam))
    X = rng.uniform(-0.5, 0.5, (6, 3))
    assert np.all(T.hamiltonian(0.5, X) == lam ** -2)
    p, _ = T.flow.evaluate(1.0, X)
    np.testing.assert_allclose(p, X + [0.0, 0.0, lam ** -2], atol=1e-12)


def test_dilation_exact_quarter(heis):
    T = transform(generate_system(heis, constant_hamiltonian(1.0)), dilation(2.0))
    assert T.hamiltonian(0.0, np.zeros((1, 3)))[0] == 0.25


def test_right_translation_transform(heis, rng):
    H = gentle()
    phi = right_translation([0.1, -0.2, 0.05])
    T = transform(generate_system(heis, H, CFG), phi)
    X = rng.uniform(-0.8, 0.8, (10, 3))
    np.testing.assert_allclose(T.hamiltonian(0.2, X), H(0.2, phi.map(X)), atol=1e-15)


def test_transform_round_trip(heis, rng):
    phi = dilation(1.5)
    sys = generate_system(heis, gentle(), CFG)
    back = transform(transform(sys, phi), phi.inverse())
    X = rng.uniform(-0.8, 0.8, (10, 3))
    assert np.abs(back.hamiltonian(0.4, X) - sys.hamiltonian(0.4, X)).max() < 1e-6


def test_transform_matches_conjugated_flow(heis):
    sys = generate_system(heis, bump_hamiltonian((0, 0, 0), 0.8, z_offset=0.2), IntegratorConfig(step=2e-2))
    T = transform(sys, dilation(2.0))
    X = heis.grid(3, margin=1.7)
    assert c0_distance(T.flow, T.meta["pointwise"], [0.5, 1.0], X) < 1e-5
    _, h = T.flow.evaluate(1.0, X)
    assert np.abs(T.conformal(1.0, X) - h).max() < 1e-5


def test_reparameterize_identity_and_scaling(heis, rng):
    H = gentle()
    sys = generate_system(heis, H, CFG)
    X = rng.uniform(-0.8, 0.8, (5, 3))
    same = reparameterize(sys, lambda t: t, lambda t: 1.0)
    np.testing.assert_array_equal(same.hamiltonian(0.3, X), H(0.3, X))
    s = 0.5
    scaled = reparameterize(sys, lambda t: s * t, lambda t: s)
    np.testing.assert_allclose(scaled.hamiltonian(0.7, X), s * H(0.7, X))
    p, h = scaled.flow.evaluate(1.0, X)
    q, f = sys.flow.evaluate(s, X)
    assert np.abs(p - q).max() < 1e-8 and np.abs(h - f).max() < 1e-8
    frozen = reparameterize(sys, lambda t: 0.4, lambda t: 0.0)
    np.testing.assert_array_equal(frozen.hamiltonian(0.7, X), 0.0)


def test_hamiltonian_recovered_from_flow(heis, rng):
    H = bump_hamiltonian((0, 0, 0), 1.2, 0.5, z_offset=0.3, time_rate=1.0)
    sys = generate_system(heis, H, CFG)
    X = rng.uniform(-0.8, 0.8, (6, 3))
    # fourth-order central difference in the interior, second-order one-sided near t = 0
    assert np.abs(recover_hamiltonian(sys.flow, 0.5, X, dt=1e-2) - H(0.5, X)).max() < 1e-6
    assert np.abs(recover_hamiltonian(sys.flow, 0.005, X, dt=1e-2) - H(0.005, X)).max() < 1e-4


def test_transformed_hamiltonian_coincides_when_flows_coincide(heis, rng):
    # F := e^{-g} (H o phi) generates phi^{-1} o phi_H o phi, recovered from that flow alone
    phi = dilation(2.0)
    sys = generate_system(heis, bump_hamiltonian((0, 0, 0), 0.8, z_offset=0.2), IntegratorConfig(step=2e-2))
    T = transform(sys, phi)
    X = rng.uniform(-0.35, 0.35, (6, 3))
    rec = recover_hamiltonian(T.meta["pointwise"], 0.5, X, dt=1e-2)
    assert np.abs(rec - T.hamiltonian(0.5, X)).max() < 1e-6


# -- norms ------------------------------------------------------------------------------


@pytest.mark.parametrize("c", [0.0, 1.5, -2.0])
def test_contact_norm_constant(heis, c):
    X = heis.grid(5)
    assert contact_norm(constant_hamiltonian(c), np.linspace(0, 1, 11), X, heis) == pytest.approx(abs(c), abs=1e-12)


def test_contact_norm_coordinate(heis):
    X = heis.grid(21)
    assert contact_norm(coordinate_hamiltonian(0), np.linspace(0, 1, 11), X, heis) == pytest.approx(4.0, abs=1e-12)


def test_uniform_norm_examples(heis):
    X = heis.grid(5)
    t = np.linspace(0, 1, 11)
    assert uniform_norm(lambda t, X: np.zeros(len(X)), t, X) == 0.0
    assert uniform_norm(lambda t, X: np.full(len(X), -3.0 * t), t, X) == pytest.approx(3.0)
    f = lambda t, X: t * X[:, 0]  # noqa: E731
    g = lambda t, X: np.sin(X[:, 1]) * t  # noqa: E731
    assert uniform_norm(lambda t, X: f(t, X) - g(t, X), t, X) == uniform_norm(lambda t, X: g(t, X) - f(t, X), t, X)


def test_hofer_length_of_coordinate(heis):
    X = heis.grid(5)
    assert hofer_length(coordinate_hamiltonian(0), np.linspace(0, 1, 3), X) == pytest.approx(4.0)


@given(st.integers(0, 2**31 - 1), st.floats(-3, 3, allow_nan=False))
def test_norm_axioms(seed, a):
    from contactflow.charts import standard_heisenberg

    chart = standard_heisenberg(1, 1.0)
    rng = np.random.default_rng(seed)
    X = chart.grid(4)
    t = np.linspace(0, 1, 5)
    coef = rng.normal(size=(3, 4))

    def field(c):
        return lambda t, X: c[0] * X[:, 0] + c[1] * np.sin(X[:, 2] + t) + c[2] * X[:, 1] ** 2 + c[3] * t

    A, B = field(coef[0]), field(coef[1])
    for norm in (lambda f: contact_norm(f, t, X, chart), lambda f: uniform_norm(f, t, X)):
        nA, nB = norm(A), norm(B)
        assert nA >= 0
        assert norm(lambda t, X: a * A(t, X)) == pytest.approx(abs(a) * nA, rel=1e-9, abs=1e-9)
        assert norm(lambda t, X: A(t, X) + B(t, X)) <= nA + nB + 1e-9
