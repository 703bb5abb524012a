"""Pointwise contact linear algebra: Reeb field, contact Hamiltonian fields,
basic-Hamiltonian predicate and pullback residuals.

Both the Reeb field R and the contact vector field X_H are obtained from the
same stacked (dim+1) x dim system

    [ iota(.) d alpha ]       [ rhs ]
    [ alpha(.)        ] X  =  [ H   ]

solved by QR least squares.  Consistency of the system is a consequence of
the contact condition, so the residual is measured and asserted, never
assumed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .charts import FD_STEP, ContactChart, _as_batch
from .errors import DegenerateContactForm, WindowEscape
from .linalg import qr_lstsq

CLOSED_FORM_TOL = 1e-9
FD_TOL = 1e-6
RANK_TOL = 1e-10


class TimeDependentHamiltonian:
    """Scalar field H(t, x) with an optional closed-form gradient.

    ``value(t, X)`` maps a time and an ``(N, dim)`` batch to ``(N,)``; the
    optional ``grad(t, X)`` returns ``(N, dim)``.  Without ``grad`` the
    gradient is taken by central differences with step ``fd_step``.
    ``support`` is an optional closed box ``(lo, hi)`` outside of which H
    vanishes for all times.
    """

    def __init__(self, value: Callable, grad: Optional[Callable] = None, *, support=None,
                 autonomous: bool = False, name: str = "H", fd_step: float = FD_STEP):
        self._value = value
        self._grad = grad
        self.support = None if support is None else (np.asarray(support[0], float), np.asarray(support[1], float))
        self.autonomous = autonomous
        self.name = name
        self.fd_step = fd_step

    def __repr__(self):
        return f"TimeDependentHamiltonian({self.name!r})"

    @property
    def has_closed_gradient(self) -> bool:
        return self._grad is not None

    def __call__(self, t: float, X) -> np.ndarray:
        Xb, single = _as_batch(X)
        v = np.broadcast_to(np.asarray(self._value(t, Xb), dtype=float), Xb.shape[:1])
        return v[0] if single else v

    def gradient(self, t: float, X) -> np.ndarray:
        Xb, single = _as_batch(X)
        if self._grad is not None:
            g = np.broadcast_to(np.asarray(self._grad(t, Xb), dtype=float), Xb.shape)
        else:
            g = self.value_and_gradient(t, Xb)[1]
        return g[0] if single else g

    def fd_gradient(self, t: float, X) -> np.ndarray:
        Xb, single = _as_batch(X)
        g = _fd_value_and_gradient(self._value, t, Xb, self.fd_step)[1]
        return g[0] if single else g

    def value_and_gradient(self, t: float, X) -> tuple[np.ndarray, np.ndarray]:
        """Value and gradient in one pass (one batched call when differencing)."""
        Xb, single = _as_batch(X)
        if self._grad is not None:
            v = np.broadcast_to(np.asarray(self._value(t, Xb), dtype=float), Xb.shape[:1])
            g = np.broadcast_to(np.asarray(self._grad(t, Xb), dtype=float), Xb.shape)
        else:
            v, g = _fd_value_and_gradient(self._value, t, Xb, self.fd_step)
        return (v[0], g[0]) if single else (v, g)

    def active_mask(self, X) -> np.ndarray:
        """Points whose trajectories can move (inside the declared support)."""
        X = np.asarray(X, dtype=float)
        if self.support is None:
            return np.ones(X.shape[0], dtype=bool)
        lo, hi = self.support
        return np.all((X >= lo) & (X <= hi), axis=-1)

    def __add__(self, other: "TimeDependentHamiltonian") -> "TimeDependentHamiltonian":
        return linear_combination([(1.0, self), (1.0, other)])

    def __rmul__(self, a: float) -> "TimeDependentHamiltonian":
        return linear_combination([(float(a), self)])

    def __neg__(self):
        return linear_combination([(-1.0, self)])

    def __sub__(self, other):
        return linear_combination([(1.0, self), (-1.0, other)])


def _fd_value_and_gradient(value, t, X, h):
    N, d = X.shape
    offsets = np.eye(d) * h
    stencil = np.concatenate([X[None], X[None] + offsets[:, None], X[None] - offsets[:, None]])
    vals = np.broadcast_to(np.asarray(value(t, stencil.reshape(-1, d)), dtype=float), ((2 * d + 1) * N,))
    vals = vals.reshape(2 * d + 1, N)
    grad = (vals[1 : d + 1] - vals[d + 1 :]) / (2.0 * h)
    return vals[0].copy(), grad.T.copy()


def linear_combination(terms) -> TimeDependentHamiltonian:
    """sum_k a_k H_k, with closed-form gradient when every term has one."""
    terms = [(float(a), H) for a, H in terms]

    def value(t, X):
        return sum(a * H(t, X) for a, H in terms)

    grad = None
    if all(H.has_closed_gradient for _, H in terms):
        def grad(t, X):
            return sum(a * H.gradient(t, X) for a, H in terms)

    support = None
    if all(H.support is not None for _, H in terms):
        lo = np.min([H.support[0] for _, H in terms], axis=0)
        hi = np.max([H.support[1] for _, H in terms], axis=0)
        support = (lo, hi)
    name = " + ".join(f"{a:g}*{H.name}" for a, H in terms)
    return TimeDependentHamiltonian(value, grad, support=support,
                                    autonomous=all(H.autonomous for _, H in terms), name=name,
                                    fd_step=min(H.fd_step for _, H in terms))


def constant_hamiltonian(c: float, name: str = "") -> TimeDependentHamiltonian:
    c = float(c)
    H = TimeDependentHamiltonian(lambda t, X: np.full(X.shape[0], c), lambda t, X: np.zeros(X.shape),
                                 autonomous=True, name=name or f"constant {c:g}")
    H.is_zero = c == 0.0
    return H


@dataclass
class ConformalFactor:
    """Time-dependent function h(t, x) with phi_t^* alpha = e^{h_t} alpha."""

    value: Callable[[float, np.ndarray], np.ndarray]
    name: str = "h"

    def __call__(self, t: float, X) -> np.ndarray:
        Xb, single = _as_batch(X)
        v = np.broadcast_to(np.asarray(self.value(t, Xb), dtype=float), Xb.shape[:1])
        return v[0] if single else v


ZERO_CONFORMAL = ConformalFactor(lambda t, X: np.zeros(X.shape[0]), name="0")


# -- the stacked system ----------------------------------------------------------


def _tolerance(chart: ContactChart, H: Optional[TimeDependentHamiltonian] = None) -> float:
    fd = chart.has_fd_dalpha or (H is not None and not H.has_closed_gradient)
    return FD_TOL if fd else CLOSED_FORM_TOL


def _system(chart: ContactChart, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = chart.alpha_at(X)
    D = chart.dalpha_at(X)
    A = np.concatenate([np.swapaxes(D, 1, 2), a[:, None, :]], axis=1)
    return A, a


def _check_rank(rdiag: np.ndarray, where: str):
    if not np.all(np.abs(rdiag) > RANK_TOL):
        raise DegenerateContactForm(f"rank-deficient contact system at {where}")


def contact_solve(chart: ContactChart, X: np.ndarray, H: np.ndarray, dH: np.ndarray, *,
                  check: bool = True, tol: Optional[float] = None):
    """Solve both defining systems at a batch of points.

    Returns ``(X_H, R, mu)`` where ``mu = dH(R)``.  One QR factorization of
    the stacked matrix serves three right-hand sides; by linearity

        X_H = mu * A^+[alpha; 0] - A^+[dH; 0] + H * A^+[0; 1],  R = A^+[0; 1].
    """
    N, d = X.shape
    A, a = _system(chart, X)
    B = np.zeros((N, d + 1, 3))
    B[:, d, 0] = 1.0
    B[:, :d, 1] = a
    B[:, :d, 2] = dH
    S, _, rdiag = qr_lstsq(A, B)
    _check_rank(rdiag, chart.name)
    R = S[:, :, 0]
    mu = np.einsum("ni,ni->n", dH, R)
    XH = mu[:, None] * S[:, :, 1] - S[:, :, 2] + H[:, None] * R
    if check:
        tol = CLOSED_FORM_TOL if tol is None else tol
        rhs = np.concatenate([mu[:, None] * a - dH, H[:, None]], axis=1)
        res = np.abs(np.einsum("nij,nj->ni", A, XH) - rhs).max(initial=0.0)
        res_r = np.abs(np.einsum("nij,nj->ni", A, R) - B[:, :, 0]).max(initial=0.0)
        if max(res, res_r) > tol * max(1.0, np.abs(rhs).max(initial=0.0)):
            raise DegenerateContactForm(f"inconsistent contact system on {chart.name}: residual {max(res, res_r):.3e}")
    return XH, R, mu


def reeb_field(chart: ContactChart, x) -> np.ndarray:
    """R with alpha(R) = 1 and iota(R) d alpha = 0."""
    Xb, single = _as_batch(x)
    N, d = Xb.shape
    A, _ = _system(chart, Xb)
    b = np.zeros((N, d + 1))
    b[:, d] = 1.0
    R, res, rdiag = qr_lstsq(A, b)
    _check_rank(rdiag, chart.name)
    if res.max(initial=0.0) > _tolerance(chart):
        raise DegenerateContactForm(f"Reeb system inconsistent on {chart.name}: residual {res.max():.3e}")
    return R[0] if single else R


def contact_vector_field(chart: ContactChart, H: TimeDependentHamiltonian, t: float, x) -> np.ndarray:
    """The unique X with alpha(X) = H and iota(X) d alpha = (R.H) alpha - dH."""
    Xb, single = _as_batch(x)
    v, g = H.value_and_gradient(t, Xb)
    XH, _, _ = contact_solve(chart, Xb, v, g, tol=_tolerance(chart, H))
    return XH[0] if single else XH


def reeb_derivative(chart: ContactChart, H: TimeDependentHamiltonian, t: float, x) -> np.ndarray:
    """R_alpha . H = dH(R_alpha)."""
    Xb, single = _as_batch(x)
    mu = np.einsum("ni,ni->n", H.gradient(t, Xb), reeb_field(chart, Xb))
    return mu[0] if single else mu


def is_basic(chart: ContactChart, H: TimeDependentHamiltonian, grid, tol: float = 1e-9, times=(0.0, 0.5, 1.0)) -> bool:
    grid = np.asarray(grid, dtype=float)
    return all(np.abs(reeb_derivative(chart, H, t, grid)).max(initial=0.0) < tol for t in times)


def defining_residuals(chart: ContactChart, H: TimeDependentHamiltonian, t: float, X) -> tuple[float, float]:
    """Max residuals of both defining equations, recomputed independently of
    the solver: |alpha(X_H) - H| and |iota(X_H) d alpha + dH - (dH.R) alpha|.
    """
    Xb, _ = _as_batch(X)
    XH = contact_vector_field(chart, H, t, Xb)
    R = reeb_field(chart, Xb)
    a = chart.alpha_at(Xb)
    D = chart.dalpha_at(Xb)
    v, g = H.value_and_gradient(t, Xb)
    first = np.abs(np.einsum("ni,ni->n", a, XH) - v).max(initial=0.0)
    contraction = np.einsum("ni,nij->nj", XH, D)
    mu = np.einsum("ni,ni->n", g, R)
    second = np.abs(contraction + g - mu[:, None] * a).max(initial=0.0)
    return float(first), float(second)


def flow_jacobian(chart: ContactChart, flow, t: float, X, fd_step: float = FD_STEP) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Central-difference Jacobian of x -> phi_t(x).

    Returns ``(J, phi_t(X), h_t(X))`` with ``J[n, i, k] = d phi^i / d x^k``.
    """
    Xb, _ = _as_batch(X)
    N, d = Xb.shape
    offsets = np.eye(d) * fd_step
    stencil = np.concatenate([Xb[None], Xb[None] + offsets[:, None], Xb[None] - offsets[:, None]])
    if chart.window < np.inf and not np.all(chart.in_window(stencil)):
        raise WindowEscape("finite-difference stencil leaves the chart window")
    pts, h = flow.evaluate(t, stencil.reshape(-1, d))
    pts = pts.reshape(2 * d + 1, N, d)
    J = chart.difference(pts[1 : d + 1], pts[d + 1 :]) / (2.0 * fd_step)  # (k, N, i)
    return np.transpose(J, (1, 2, 0)), pts[0], np.asarray(h).reshape(2 * d + 1, N)[0]


def pullback_residual(chart: ContactChart, flow, h: Optional[ConformalFactor], t: float, x,
                      fd_step: float = FD_STEP) -> np.ndarray:
    """|| (D phi_t)^T alpha(phi_t x) - e^{h(t, x)} alpha(x) ||_inf per point.

    ``h=None`` uses the conformal factor integrated alongside the flow.
    """
    Xb, single = _as_batch(x)
    J, image, h_flow = flow_jacobian(chart, flow, t, Xb, fd_step)
    hv = h_flow if h is None else h(t, Xb)
    pulled = np.einsum("nik,ni->nk", J, chart.alpha_at(image))
    res = np.abs(pulled - np.exp(hv)[:, None] * chart.alpha_at(Xb)).max(axis=1)
    return res[0] if single else res
