"""The Heisenberg group H^n = R^{2n+1}: group law, right translations,
translation Hamiltonians, group-convolution mollifiers and their
Riemann-sum approximations by translated functions.

Points use chart coordinates (x_1, ..., x_{2n}, x_{2n+1}); the complex
coordinates are x'_j = x_{2j-1} + i x_{2j}.  The Hermitian product is
<u, v> = sum u_j conj(v_j), so that

    x . y = (x' + y', x_{2n+1} + y_{2n+1} + 1/2 Im<x', y'>).
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gamma, pi
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

from .charts import ContactChart, _as_batch
from .core import TimeDependentHamiltonian
from .errors import GeometryError, SupportOverflow
from .transforms import ContactTransform


@dataclass(frozen=True)
class HeisenbergPoint:
    z_part: tuple[complex, ...]
    real_part: float

    @classmethod
    def from_coords(cls, coords) -> "HeisenbergPoint":
        c = np.asarray(coords, dtype=float)
        if c.ndim != 1 or c.size % 2 != 1:
            raise ValueError("Heisenberg coordinates have odd length 2n+1")
        zp = tuple(complex(a, b) for a, b in zip(c[0:-1:2], c[1:-1:2]))
        return cls(zp, float(c[-1]))

    def to_coords(self) -> np.ndarray:
        out = []
        for z in self.z_part:
            out += [z.real, z.imag]
        return np.array(out + [self.real_part])

    def __mul__(self, other: "HeisenbergPoint") -> "HeisenbergPoint":
        return HeisenbergPoint.from_coords(group_mul(self.to_coords(), other.to_coords()))

    def inverse(self) -> "HeisenbergPoint":
        return HeisenbergPoint.from_coords(group_inv(self.to_coords()))


def im_hermitian(X, Y) -> np.ndarray:
    """Im<x', y'> for coordinate arrays (broadcasting over leading axes)."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    a, b = X[..., 0:-1:2], X[..., 1:-1:2]
    c, d = Y[..., 0:-1:2], Y[..., 1:-1:2]
    return (b * c - a * d).sum(axis=-1)


def group_mul(X, Y) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    out = X + Y
    out[..., -1] = out[..., -1] + 0.5 * im_hermitian(X, Y)
    return out


def group_inv(X) -> np.ndarray:
    return -np.asarray(X, dtype=float)


def _check_tau(tau, dim: Optional[int] = None) -> np.ndarray:
    tau = np.asarray(tau, dtype=float)
    if tau.ndim != 1 or tau.size % 2 != 1:
        raise ValueError(f"translation element must be a point of R^(2n+1), got shape {tau.shape}")
    if dim is not None and tau.size != dim:
        raise ValueError(f"translation element has {tau.size} coordinates, chart has {dim}")
    return tau


def right_translation(tau, name: str = "") -> ContactTransform:
    """R_tau(x) = x . tau^{-1}; strictly contact (conformal factor 0)."""
    tau = _check_tau(tau)
    tinv = group_inv(tau)

    def fwd(X):
        return group_mul(X, tinv)

    def inv(X):
        return group_mul(X, tau)

    zero = lambda X: np.zeros(np.asarray(X).shape[:-1])  # noqa: E731
    one = lambda X: np.ones(np.asarray(X).shape[:-1])  # noqa: E731
    return ContactTransform(fwd, inv, zero, scale=one, affine=True,
                            name=name or f"right-translation({', '.join(f'{v:g}' for v in tau)})")


def translation_hamiltonian(tau, name: str = "") -> TimeDependentHamiltonian:
    """F^tau(x) = -tau_{2n+1} - Im<x', tau'>; basic and affine, its time-t map is R_{t tau}."""
    tau = _check_tau(tau)
    grad = np.zeros_like(tau)
    # d/dx of -(x_{2j} tau_{2j-1} - x_{2j-1} tau_{2j})
    grad[0:-1:2] = tau[1:-1:2]
    grad[1:-1:2] = -tau[0:-1:2]

    def value(t, X):
        return -tau[-1] - im_hermitian(X, tau)

    def gradient(t, X):
        return np.broadcast_to(grad, X.shape)

    return TimeDependentHamiltonian(value, gradient, autonomous=True,
                                    name=name or f"translation({', '.join(f'{v:g}' for v in tau)})")


# -- mollifiers ----------------------------------------------------------------------


@dataclass(frozen=True)
class MollifierKernel:
    """K(v) = c (1 - |v|^2)^4 on the unit ball of R^dim, normalized to mass 1."""

    dim: int
    support_radius: float
    normalization: float
    total_integral: float

    def __call__(self, V) -> np.ndarray:
        V = np.asarray(V, dtype=float)
        r2 = (V ** 2).sum(axis=-1) / self.support_radius ** 2
        return np.where(r2 < 1.0, self.normalization * np.clip(1.0 - r2, 0.0, None) ** 4, 0.0)

    def scaled(self, eps: float) -> Callable[[np.ndarray], np.ndarray]:
        """K_eps(x) = eps^{-dim} K(x / eps)."""
        return lambda V: self(np.asarray(V) / eps) / eps ** self.dim


def polynomial_kernel(dim: int = 3) -> MollifierKernel:
    # int_{|v|<1} (1-|v|^2)^4 dv = pi^{d/2} Gamma(5) / Gamma(5 + d/2)
    c = gamma(5.0 + dim / 2.0) / (pi ** (dim / 2.0) * gamma(5.0))
    sphere = 2.0 * pi ** (dim / 2.0) / gamma(dim / 2.0)
    radial, _ = integrate.quad(lambda r: r ** (dim - 1) * c * (1.0 - r * r) ** 4, 0.0, 1.0,
                               epsabs=1e-14, epsrel=1e-14)
    return MollifierKernel(dim=dim, support_radius=1.0, normalization=c, total_integral=sphere * radial)


def midpoint_nodes(kernel: MollifierKernel, per_axis: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor midpoint nodes on [-1, 1]^dim restricted to the kernel support.

    Returns ``(V, w)`` with weights ``w_j = K(v_j) * cell volume`` rescaled to
    sum to 1, so a constant is reproduced exactly at every refinement.
    """
    if per_axis < 1:
        raise ValueError("need at least one node per axis")
    h = 2.0 * kernel.support_radius / per_axis
    axis = -kernel.support_radius + h * (np.arange(per_axis) + 0.5)
    mesh = np.meshgrid(*([axis] * kernel.dim), indexing="ij")
    V = np.stack([m.ravel() for m in mesh], axis=-1)
    w = kernel(V) * h ** kernel.dim
    keep = w > 0
    V, w = V[keep], w[keep]
    return V, w / w.sum()


def riemann_nodes(kernel: MollifierKernel, eps: float, per_axis: int) -> list[tuple[float, np.ndarray]]:
    """Nodes (c_j, tau_j) with |tau_j| < eps for Riemann sums of F * K_eps."""
    V, w = midpoint_nodes(kernel, per_axis)
    return [(float(c), eps * v) for c, v in zip(w, V)]


def fattened_box(box, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Box containing {x . v : x in box, |v| < eps}."""
    lo, hi = (np.asarray(b, dtype=float) for b in box)
    radial = np.sqrt((np.maximum(np.abs(lo), np.abs(hi))[:-1] ** 2).sum())
    grow = np.full(lo.shape, float(eps))
    grow[-1] = eps * (1.0 + 0.5 * radial)
    return lo - grow, hi + grow


def _box_inside(box, window: float) -> bool:
    lo, hi = box
    return bool(np.all(lo >= -window) and np.all(hi <= window))


def riemann_sum_translate(F: Callable, nodes: Sequence[tuple[float, np.ndarray]]) -> Callable:
    """x -> sum_j c_j F(x . tau_j^{-1})."""
    cs = np.array([c for c, _ in nodes], dtype=float)
    taus = np.array([tau for _, tau in nodes], dtype=float)

    def G(X):
        Xb, single = _as_batch(X)
        out = np.zeros(Xb.shape[0])
        for c, tau in zip(cs, taus):
            out += c * np.asarray(F(group_mul(Xb, group_inv(tau))), dtype=float)
        return out[0] if single else out

    return G


def mollify(F: Callable, kernel: MollifierKernel, eps: float, grid, *, support=None,
            window: Optional[float] = None, per_axis: int = 21, chunk: int = 4096) -> np.ndarray:
    """F_eps = F * K_eps on ``grid`` by tensor midpoint quadrature.

    Uses F_eps(x) = int_{|v|<1} F(x . (eps v)^{-1}) K(v) dv, which is the group
    convolution after the Haar-measure substitution y = x . (eps v)^{-1}.
    ``support`` (a box) and ``window`` enable the support-overflow check.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if support is not None and window is not None:
        fat = fattened_box(support, eps)
        if not _box_inside(fat, window):
            raise SupportOverflow(f"support of the mollified function leaves the window [-{window}, {window}]")
    X = np.asarray(grid, dtype=float)
    V, w = midpoint_nodes(kernel, per_axis)
    shifts = group_inv(eps * V)
    out = np.empty(X.shape[0])
    for s in range(0, X.shape[0], chunk):
        Xc = X[s : s + chunk]
        pts = group_mul(Xc[:, None, :], shifts[None, :, :])
        vals = np.asarray(F(pts.reshape(-1, X.shape[1])), dtype=float).reshape(len(Xc), len(V))
        out[s : s + chunk] = vals @ w
    return out


# -- cut-off translation Hamiltonians --------------------------------------------------


def smootherstep(u) -> np.ndarray:
    """1 for u <= 0, 0 for u >= 1, C^2 polynomial transition in between."""
    u = np.clip(u, 0.0, 1.0)
    return 1.0 - u ** 3 * (10.0 - 15.0 * u + 6.0 * u * u)


def smootherstep_derivative(u) -> np.ndarray:
    inside = (u > 0.0) & (u < 1.0)
    uc = np.clip(u, 0.0, 1.0)
    return np.where(inside, -30.0 * uc ** 2 * (1.0 - uc) ** 2, 0.0)


def box_cutoff(box, width: float):
    """rho = 1 on ``box``, 0 beyond distance ``width`` per coordinate; returns (rho, grad rho)."""
    lo, hi = (np.asarray(b, dtype=float) for b in box)

    def parts(X):
        below = (lo - X) / width
        above = (X - hi) / width
        u = np.maximum(below, above)
        du = np.where(below > above, -1.0 / width, 1.0 / width)
        return smootherstep(u), smootherstep_derivative(u) * du

    def rho(X):
        return np.prod(parts(X)[0], axis=-1)

    def grad(X):
        s, ds = parts(X)
        d = X.shape[-1]
        g = np.empty(X.shape)
        for i in range(d):
            others = np.prod(np.delete(s, i, axis=-1), axis=-1)
            g[..., i] = ds[..., i] * others
        return g

    return rho, grad


def cutoff_translation_hamiltonian(tau, support_of_F, delta: float, window: float,
                                   name: str = "") -> TimeDependentHamiltonian:
    """G = rho . F^tau with rho = 1 on W = {x . v^{-1} : x in supp F, |v| <= delta}.

    The orbit {x . (s tau)^{-1} : 0 <= s <= 1} of a point of supp F stays in W
    when |tau| <= delta, so the time-t map of G is R_{t tau} there.  The
    transition of rho has width delta/2; its outer edge must lie in the window.
    """
    tau = _check_tau(tau)
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if np.linalg.norm(tau) > delta * (1 + 1e-12):
        raise GeometryError(f"|tau| = {np.linalg.norm(tau):.3g} exceeds delta = {delta:.3g}")
    W = fattened_box(support_of_F, delta)
    outer = (W[0] - delta / 2, W[1] + delta / 2)
    if not _box_inside(outer, window):
        raise GeometryError(f"cut-off region leaves the window [-{window}, {window}]")
    F = translation_hamiltonian(tau)
    rho, drho = box_cutoff(W, delta / 2)

    def value(t, X):
        return rho(X) * F(t, X)

    def gradient(t, X):
        return rho(X)[:, None] * F.gradient(t, X) + F(t, X)[:, None] * drho(X)

    return TimeDependentHamiltonian(value, gradient, support=outer, autonomous=True,
                                    name=name or f"cutoff {F.name}")


def check_heisenberg(chart: ContactChart) -> int:
    if chart.meta.get("kind") != "heisenberg":
        raise GeometryError(f"{chart.name} is not a Heisenberg chart")
    return chart.meta["n"]
