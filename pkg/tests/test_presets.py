import numpy as np
import pytest

from contactflow.charts import flat_unit_cotangent_torus, standard_heisenberg
from contactflow.core import TimeDependentHamiltonian
from contactflow.geodesic import RiemannianMetric2
from contactflow.presets import PRESETS, bump_hamiltonian, build_preset, list_presets, tabulated_hamiltonian
from contactflow.transforms import ContactTransform, transform_pullback_residual


def test_catalog_lists_every_preset():
    lines = list_presets()
    assert lines[0] == "[hamiltonians]"
    text = "\n".join(lines)
    for name in PRESETS:
        assert f"  {name}(" in text
    for name in ("reeb", "coordinate-x", "translation", "bump", "flat", "conformal-bump", "oscillatory",
                 "dilation", "right-translation"):
        assert name in PRESETS


def test_translation_default_is_constant_minus_one():
    assert build_preset("translation").name == "constant -1"
    assert "default instance: constant -1" in "\n".join(list_presets())
    assert build_preset("translation", tau=(0.0, 0.0, 1.0))(0.0, np.zeros((2, 3))).tolist() == [-1.0, -1.0]


@pytest.mark.parametrize("name", [n for n in PRESETS if n != "tabulated"])
def test_every_preset_instantiates(name):
    obj = build_preset(name)
    kind = PRESETS[name].kind
    if kind == "hamiltonian":
        assert isinstance(obj, TimeDependentHamiltonian)
        chart = flat_unit_cotangent_torus() if name == "geodesic" else standard_heisenberg(1)
        X = chart.grid(3, margin=0.5)
        assert np.all(np.isfinite(obj(0.0, X)))
    elif kind == "metric":
        assert isinstance(obj, RiemannianMetric2)
    else:
        assert isinstance(obj, ContactTransform)
        chart = standard_heisenberg(1)
        X = chart.grid(3, margin=1.5)
        assert transform_pullback_residual(chart, obj, X, fd_step=1e-4).max() < 1e-8


def test_unknown_preset_and_parameters():
    with pytest.raises(KeyError):
        build_preset("nope")
    with pytest.raises(ValueError):
        build_preset("bump", width=3)


def test_bump_support_and_profiles(rng):
    for profile in ("smooth", "polynomial"):
        H = bump_hamiltonian((0.1, 0, 0), 0.5, 2.0, profile=profile)
        assert H(0.0, np.array([[0.1, 0.0, 0.0]]))[0] == pytest.approx(2.0)
        X = rng.uniform(-0.5, 0.7, (200, 3))
        assert np.all(H(0.0, X[~H.active_mask(X)]) == 0.0)
        inner = rng.uniform(-0.3, 0.5, (20, 3))
        np.testing.assert_allclose(H.gradient(0.0, inner), H.fd_gradient(0.0, inner), atol=1e-6)
    with pytest.raises(ValueError):
        bump_hamiltonian((0, 0, 0), 1.0, profile="square")
    with pytest.raises(ValueError):
        bump_hamiltonian((0, 0, 0), -1.0)


def test_bump_time_dependence():
    H = bump_hamiltonian((0, 0, 0), 1.0, 1.0, time_rate=1.0, frequency=0.25)
    x = np.zeros((1, 3))
    assert H(0.0, x)[0] == pytest.approx(1.0)
    assert H(1.0, x)[0] == pytest.approx(0.0, abs=1e-15)
    assert not H.autonomous


def test_geodesic_preset_with_metric_name():
    H = build_preset("geodesic", metric="flat")
    X = flat_unit_cotangent_torus().grid(3)
    np.testing.assert_allclose(H(0.0, X), 1.0)


def test_tabulated_hamiltonian(tmp_path):
    axes = [np.linspace(-1, 1, 9)] * 3
    mesh = np.meshgrid(*axes, indexing="ij")
    X = np.stack([m.ravel() for m in mesh], axis=-1)
    vals = np.prod(1 - X ** 2, axis=1)
    path = tmp_path / "table.csv"
    rows = "\n".join(",".join(f"{v:.17g}" for v in row) for row in np.column_stack([X, vals]))
    path.write_text("x1,x2,x3,H\n" + rows + "\n")
    H = tabulated_hamiltonian(path)
    assert H.autonomous and np.all(H.support[0] == -1) and np.all(H.support[1] == 1)
    probe = np.array([[0.1, -0.2, 0.3], [2.0, 0.0, 0.0]])
    np.testing.assert_allclose(H(0.0, probe), [0.99 * 0.96 * 0.91, 0.0], atol=1e-5)
    linear = tabulated_hamiltonian(path, method="linear")
    assert abs(linear(0.0, probe)[0] - 0.99 * 0.96 * 0.91) < 0.05
    path.write_text("x1,x2,x3,H\n" + "\n".join(rows.split("\n")[:-1]) + "\n")
    with pytest.raises(ValueError):
        tabulated_hamiltonian(path)
