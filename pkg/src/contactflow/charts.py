"""Coordinate models of contact manifolds.

A chart is a single global coordinate system together with the coefficient
functions of a contact form.  Points are plain float arrays: one point has
shape ``(dim,)`` and a batch has shape ``(N, dim)``.  All chart callables are
vectorized over the leading batch axis.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DegenerateContactForm
from .linalg import pfaffian

FD_STEP = 1e-5
TWO_PI = 2.0 * np.pi


def _as_batch(X) -> tuple[np.ndarray, bool]:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        return X[None, :], True
    return X, False


@dataclass(frozen=True)
class VolumeDensity:
    """Density of alpha ^ (d alpha)^n against coordinate Lebesgue measure.

    ``value`` is the absolute density; ``orientation`` is the sign of the
    coefficient of dx_1 ^ ... ^ dx_dim, kept separately so no orientation
    convention has to be assumed.
    """

    value: float
    orientation: int


@dataclass(frozen=True)
class ContactChart:
    dim: int
    alpha: Callable[[np.ndarray], np.ndarray]
    closed_dalpha: Optional[Callable[[np.ndarray], np.ndarray]] = None
    periodic: tuple[bool, ...] = ()
    periods: tuple[float, ...] = ()
    window: float = np.inf
    name: str = "chart"
    fd_step: float = FD_STEP
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.dim % 2 != 1 or self.dim < 3:
            raise ValueError(f"contact charts need odd dimension >= 3, got {self.dim}")
        if not self.periodic:
            object.__setattr__(self, "periodic", (False,) * self.dim)
        if not self.periods:
            object.__setattr__(self, "periods", (0.0,) * self.dim)
        if len(self.periodic) != self.dim or len(self.periods) != self.dim:
            raise ValueError("periodic mask and periods must have length dim")

    @property
    def n(self) -> int:
        return (self.dim - 1) // 2

    @property
    def has_fd_dalpha(self) -> bool:
        return self.closed_dalpha is None

    # -- forms ---------------------------------------------------------------

    def alpha_at(self, X) -> np.ndarray:
        Xb, single = _as_batch(X)
        out = np.broadcast_to(self.alpha(Xb), Xb.shape)
        return out[0] if single else out

    def dalpha_at(self, X) -> np.ndarray:
        """Matrix D with D[i, j] = d_i alpha_j - d_j alpha_i.

        With this convention (iota(X) d alpha)_j = sum_i X_i D[i, j].
        """
        Xb, single = _as_batch(X)
        if self.closed_dalpha is not None:
            D = np.broadcast_to(self.closed_dalpha(Xb), Xb.shape + (self.dim,))
        else:
            D = self.dalpha_fd(Xb)
        return D[0] if single else D

    def dalpha_fd(self, X, step: Optional[float] = None) -> np.ndarray:
        """Central-difference exterior derivative of alpha."""
        Xb, single = _as_batch(X)
        h = self.fd_step if step is None else step
        N, d = Xb.shape
        offsets = np.eye(d) * h
        stencil = np.concatenate([Xb[None] + offsets[:, None], Xb[None] - offsets[:, None]])
        vals = np.broadcast_to(self.alpha(stencil.reshape(-1, d)), (2 * d * N, d))
        vals = vals.reshape(2, d, N, d)
        J = (vals[0] - vals[1]) / (2.0 * h)  # J[i, n, j] = d_i alpha_j
        J = np.moveaxis(J, 0, 1)
        D = J - np.swapaxes(J, 1, 2)
        return D[0] if single else D

    # -- coordinates -------------------------------------------------------

    def reduce(self, X) -> np.ndarray:
        """Reduce periodic coordinates to their fundamental domain."""
        X = np.array(X, dtype=float, copy=True)
        for i, (per, P) in enumerate(zip(self.periodic, self.periods)):
            if per:
                X[..., i] = np.mod(X[..., i], P)
                X[..., i] = np.where(X[..., i] >= P, 0.0, X[..., i])
        return X

    def point(self, coords: Sequence[float]) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (self.dim,):
            raise ValueError(f"{self.name} points have {self.dim} coordinates, got shape {coords.shape}")
        return self.reduce(coords)

    def difference(self, X, Y) -> np.ndarray:
        """X - Y with periodic components taken along the shortest arc."""
        diff = np.asarray(X, dtype=float) - np.asarray(Y, dtype=float)
        for i, (per, P) in enumerate(zip(self.periodic, self.periods)):
            if per:
                diff[..., i] = diff[..., i] - P * np.round(diff[..., i] / P)
        return diff

    def distance(self, X, Y) -> np.ndarray:
        return np.sqrt((self.difference(X, Y) ** 2).sum(axis=-1))

    def in_window(self, X, margin: float = 0.0) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        mask = np.ones(X.shape[:-1], dtype=bool)
        for i, per in enumerate(self.periodic):
            if not per:
                mask &= np.abs(X[..., i]) <= self.window - margin + 1e-12
        return mask

    def grid(self, per_axis: int | Sequence[int], margin: float = 0.0) -> np.ndarray:
        """Tensor grid over the window (non-periodic) / fundamental domain."""
        if np.isscalar(per_axis):
            per_axis = (int(per_axis),) * self.dim
        axes = []
        for i, m in enumerate(per_axis):
            if self.periodic[i]:
                axes.append(np.arange(m) * self.periods[i] / m)
            else:
                lim = self.window - margin
                axes.append(np.linspace(-lim, lim, m) if m > 1 else np.zeros(1))
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=-1)

    def random_points(self, rng: np.random.Generator, size: int, margin: float = 0.0) -> np.ndarray:
        X = np.empty((size, self.dim))
        for i in range(self.dim):
            if self.periodic[i]:
                X[:, i] = rng.uniform(0.0, self.periods[i], size)
            else:
                lim = self.window - margin
                X[:, i] = rng.uniform(-lim, lim, size)
        return X


# -- concrete charts -----------------------------------------------------------


def standard_heisenberg(n: int = 1, L: float = 2.0) -> ContactChart:
    """R^{2n+1} with alpha_0 = dx_{2n+1} - 1/2 sum (x_{2j-1} dx_{2j} - x_{2j} dx_{2j-1})."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if not L > 0:
        raise ValueError(f"window radius must be positive, got {L}")
    n = int(n)
    dim = 2 * n + 1

    def alpha(X):
        A = np.zeros(X.shape)
        A[:, 0 : 2 * n : 2] = 0.5 * X[:, 1 : 2 * n : 2]
        A[:, 1 : 2 * n : 2] = -0.5 * X[:, 0 : 2 * n : 2]
        A[:, -1] = 1.0
        return A

    D0 = np.zeros((dim, dim))
    for j in range(n):
        D0[2 * j, 2 * j + 1] = -1.0
        D0[2 * j + 1, 2 * j] = 1.0

    def dalpha(X):
        return np.broadcast_to(D0, (X.shape[0], dim, dim))

    return ContactChart(dim=dim, alpha=alpha, closed_dalpha=dalpha, window=float(L),
                        name=f"heisenberg(n={n})", meta={"kind": "heisenberg", "n": n})


def flat_unit_cotangent_torus() -> ContactChart:
    """Unit cotangent bundle of the flat 2-torus in angle coordinates (q1, q2, theta)."""

    def alpha(X):
        th = X[:, 2]
        return np.stack([np.cos(th), np.sin(th), np.zeros_like(th)], axis=-1)

    def dalpha(X):
        th = X[:, 2]
        D = np.zeros((X.shape[0], 3, 3))
        # d alpha = -sin(th) d th ^ d q1 + cos(th) d th ^ d q2
        D[:, 2, 0] = -np.sin(th)
        D[:, 0, 2] = np.sin(th)
        D[:, 2, 1] = np.cos(th)
        D[:, 1, 2] = -np.cos(th)
        return D

    return ContactChart(dim=3, alpha=alpha, closed_dalpha=dalpha, periodic=(True, True, True),
                        periods=(1.0, 1.0, TWO_PI), name="flat_unit_cotangent_torus",
                        meta={"kind": "flat_torus"})


def rescaled_chart(chart: ContactChart, f: Callable[[np.ndarray], np.ndarray], name: str = "") -> ContactChart:
    """Chart with contact form e^f alpha; its d alpha is finite-differenced."""

    def alpha(X):
        return np.exp(f(X))[:, None] * chart.alpha(X)

    return ContactChart(dim=chart.dim, alpha=alpha, closed_dalpha=None, periodic=chart.periodic,
                        periods=chart.periods, window=chart.window, name=name or f"e^f*{chart.name}",
                        fd_step=chart.fd_step, meta=dict(chart.meta))


def volume_density_coefficient(chart: ContactChart, X) -> np.ndarray:
    """Signed coefficient of alpha ^ (d alpha)^n on dx_1 ^ ... ^ dx_dim."""
    Xb, single = _as_batch(X)
    a = chart.alpha_at(Xb)
    D = chart.dalpha_at(Xb)
    N, d = Xb.shape
    bordered = np.zeros((N, d + 1, d + 1))
    bordered[:, 0, 1:] = a
    bordered[:, 1:, 0] = -a
    bordered[:, 1:, 1:] = D
    c = factorial(chart.n) * pfaffian(bordered)
    return c[0] if single else c


def volume_density(chart: ContactChart, x) -> VolumeDensity:
    c = float(volume_density_coefficient(chart, np.asarray(x, dtype=float)))
    if abs(c) < 1e-12:
        raise DegenerateContactForm(f"alpha ^ (d alpha)^n vanishes at {x}")
    return VolumeDensity(value=abs(c), orientation=1 if c > 0 else -1)


def check_contact_condition(chart: ContactChart, per_axis: int = 5, floor: float = 1e-12) -> float:
    """Minimum |density| over a sample grid; raises if the form degenerates."""
    X = chart.grid(per_axis)
    c = np.abs(volume_density_coefficient(chart, X))
    low = float(c.min())
    if low < floor:
        raise DegenerateContactForm(f"contact condition fails on {chart.name}: min density {low:.3e}")
    return low
