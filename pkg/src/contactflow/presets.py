"""Named closed-form Hamiltonians, metrics and transforms."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from . import geodesic as geo
from .core import TimeDependentHamiltonian, constant_hamiltonian
from .heisenberg import right_translation, translation_hamiltonian
from .transforms import dilation


def _vector(v, dim=None) -> np.ndarray:
    a = np.atleast_1d(np.asarray(v, dtype=float))
    if dim is not None and a.size == 1 and dim > 1:
        a = np.full(dim, float(a[0]))
    if dim is not None and a.size != dim:
        raise ValueError(f"expected {dim} components, got {a.size}")
    return a


PROFILES = ("smooth", "polynomial")
POLY_POWER = 6


def _bump_profile(U, profile: str = "smooth"):
    """Product bump on the open unit cube and its gradient in u.

    ``smooth``: prod exp(1 - 1/(1 - u_i^2)), C-infinity but with very large
    high derivatives near the edge.  ``polynomial``: prod (1 - u_i^2)^6, C^5
    across the edge and with moderate derivatives, which keeps
    finite-difference Jacobians of its flow accurate.
    """
    inside = np.all(np.abs(U) < 1.0, axis=1)
    Uc = np.where(np.abs(U) < 1.0, U, 0.0)
    den = 1.0 - Uc * Uc
    if profile == "smooth":
        val = np.where(inside, np.exp(np.sum(1.0 - 1.0 / den, axis=1)), 0.0)
        grad = val[:, None] * (-2.0 * Uc / den ** 2)
    elif profile == "polynomial":
        val = np.where(inside, np.prod(den, axis=1) ** POLY_POWER, 0.0)
        grad = np.where(inside[:, None], val[:, None] * (-2.0 * POLY_POWER * Uc / np.where(den > 0, den, 1.0)), 0.0)
    else:
        raise ValueError(f"unknown bump profile {profile!r}; expected one of {PROFILES}")
    return val, grad


def bump_hamiltonian(center, radius, height: float = 1.0, *, z_offset=None, time_rate: float = 0.0,
                     frequency: float = 0.0, profile: str = "smooth", name: str = "") -> TimeDependentHamiltonian:
    """height * a(t) * psi((x - center) / radius) [* (x_dim + z_offset)],
    with a(t) = (1 + time_rate t) cos(2 pi frequency t).

    psi is the smooth product bump equal to 1 at the center and supported in
    the box center +- radius.  With ``z_offset`` the bump multiplies the last
    coordinate shifted by ``z_offset``, which makes R.H nonzero on the
    Heisenberg chart.
    """
    c = np.asarray(center, dtype=float)
    r = _vector(radius, c.size)
    if np.any(r <= 0):
        raise ValueError("bump radius must be positive")
    if profile not in PROFILES:
        raise ValueError(f"unknown bump profile {profile!r}; expected one of {PROFILES}")
    height = float(height)

    def parts(t, X):
        v, gu = _bump_profile((X - c) / r, profile)
        g = gu / r
        amp = height * (1.0 + time_rate * t) * np.cos(2.0 * np.pi * frequency * t)
        if z_offset is None:
            return amp * v, amp * g
        w = X[:, -1] + z_offset
        g = g * w[:, None]
        g[:, -1] += v
        return amp * v * w, amp * g

    label = name or (f"bump(c={tuple(float(x) for x in c)}, r={tuple(float(x) for x in r)}, h={height:g}"
                     + (f", z+{z_offset:g}" if z_offset is not None else "")
                     + (f", rate={time_rate:g}" if time_rate else "")
                     + (f", freq={frequency:g}" if frequency else "")
                     + (f", {profile}" if profile != "smooth" else "") + ")")
    return TimeDependentHamiltonian(lambda t, X: parts(t, X)[0], lambda t, X: parts(t, X)[1],
                                    support=(c - r, c + r),
                                    autonomous=time_rate == 0.0 and frequency == 0.0, name=label)


def tabulated_hamiltonian(path, method: str = "cubic") -> TimeDependentHamiltonian:
    """Autonomous H interpolated from a CSV table with header x1,...,xd,H.

    The rows must cover a full tensor grid (any order).  Outside the grid the
    value is 0 and the grid box is the declared support, so the table should
    vanish on its boundary.  Gradients are finite differences.
    """
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] < 2:
        raise ValueError(f"{path}: expected columns x1,...,xd,H")
    coords, vals = data[:, :-1], data[:, -1]
    axes = [np.unique(coords[:, i]) for i in range(coords.shape[1])]
    shape = tuple(len(a) for a in axes)
    if int(np.prod(shape)) != len(vals):
        raise ValueError(f"{path}: rows do not form a full tensor grid")
    idx = tuple(np.searchsorted(a, coords[:, i]) for i, a in enumerate(axes))
    table = np.full(shape, np.nan)
    table[idx] = vals
    if np.isnan(table).any():
        raise ValueError(f"{path}: rows do not form a full tensor grid")
    interp = RegularGridInterpolator(axes, table, method=method, bounds_error=False, fill_value=0.0)
    return TimeDependentHamiltonian(lambda t, X: interp(X), support=(np.array([a[0] for a in axes]),
                                                                     np.array([a[-1] for a in axes])),
                                    autonomous=True, name=f"tabulated({path})")


def coordinate_hamiltonian(index: int = 0, dim: int = 3) -> TimeDependentHamiltonian:
    e = np.zeros(dim)
    e[index] = 1.0
    return TimeDependentHamiltonian(lambda t, X: X[:, index].copy(), lambda t, X: np.broadcast_to(e, X.shape),
                                    autonomous=True, name=f"x{index + 1}")


def translation_preset(tau) -> TimeDependentHamiltonian:
    tau = np.asarray(tau, dtype=float)
    if not np.any(tau[:-1]):
        return constant_hamiltonian(-tau[-1], name=f"constant {-tau[-1] + 0.0:g}")
    return translation_hamiltonian(tau)


@dataclass(frozen=True)
class Preset:
    kind: str  # hamiltonian | metric | transform
    name: str
    factory: Callable
    defaults: dict
    description: str

    def build(self, **params):
        unknown = set(params) - set(self.defaults)
        if unknown:
            raise ValueError(f"preset {self.name!r} has no parameter(s) {sorted(unknown)}")
        kw = dict(self.defaults)
        kw.update(params)
        return self.factory(**kw)


PRESETS: dict[str, Preset] = {}


def _register(kind, name, factory, defaults, description):
    PRESETS[name] = Preset(kind, name, factory, defaults, description)


_register("hamiltonian", "reeb", lambda speed: constant_hamiltonian(speed), {"speed": 1.0},
          "constant Hamiltonian; generates the Reeb flow at the given speed")
_register("hamiltonian", "coordinate-x", lambda dim: coordinate_hamiltonian(0, dim), {"dim": 3},
          "H = x1 on a Heisenberg chart")
_register("hamiltonian", "translation", lambda tau: translation_preset(tau), {"tau": (0.0, 0.0, 1.0)},
          "F^tau(x) = -tau_last - Im<x', tau'>, generator of right translations")
_register("hamiltonian", "bump",
          lambda center, radius, height, z_offset, time_rate, frequency, profile: bump_hamiltonian(
              center, radius, height, z_offset=z_offset, time_rate=time_rate, frequency=frequency, profile=profile),
          {"center": (0.0, 0.0, 0.0), "radius": 1.0, "height": 1.0, "z_offset": None, "time_rate": 0.0,
           "frequency": 0.0, "profile": "smooth"},
          "smooth compactly supported product bump; z_offset multiplies by (x_last + z_offset)")
_register("hamiltonian", "geodesic",
          lambda metric: geo.geodesic_hamiltonian(build_preset(metric) if isinstance(metric, str) else metric),
          {"metric": "conformal-bump"}, "sqrt(g*(p, p)) on the flat unit cotangent torus for a metric preset")
_register("hamiltonian", "tabulated", lambda file, method: tabulated_hamiltonian(file, method),
          {"file": None, "method": "cubic"}, "autonomous H interpolated from a CSV grid x1,...,xd,H")
_register("metric", "flat", lambda: geo.flat_metric(), {}, "identity metric on T^2")
_register("metric", "conformal-bump", lambda scale, kappa: geo.conformal_bump_metric(scale, kappa=kappa),
          {"scale": 0.3, "kappa": 2.0}, "e^{2 scale b(q)} I with a periodic bump b")
_register("metric", "oscillatory", lambda a, b: geo.oscillatory_metric(a, b), {"a": 0.25, "b": 4.0},
          "(1 + a sin(2 pi b q1)) I")
_register("transform", "dilation", lambda lam: dilation(lam), {"lam": 2.0}, "(x', z) -> (lam x', lam^2 z)")
_register("transform", "right-translation", lambda tau: right_translation(tau), {"tau": (0.1, 0.0, 0.0)},
          "x -> x . tau^{-1}")


def build_preset(name: str, **params):
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; known: {sorted(PRESETS)}")
    return PRESETS[name].build(**params)


def list_presets() -> list[str]:
    """Human-readable catalog lines, grouped by kind."""
    lines = []
    for kind in ("hamiltonian", "metric", "transform"):
        lines.append(f"[{kind}s]")
        for p in PRESETS.values():
            if p.kind != kind:
                continue
            args = ", ".join(f"{k}={v}" for k, v in p.defaults.items())
            lines.append(f"  {p.name}({args}): {p.description}")
            if p.name == "translation":
                lines.append(f"    default instance: {build_preset('translation').name}")
    return lines
