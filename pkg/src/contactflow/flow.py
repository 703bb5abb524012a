"""Time integration of contact systems.

The state integrated is the augmented pair (x, h): the point moves with X_H
and the conformal factor accumulates h' = (R_alpha . H)(t, x).  Integration
is fixed-step; each segment between two requested times is split into
ceil(length / step) equal steps, so evaluating at a time and integrating a
trajectory to the same time perform identical arithmetic.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .charts import FD_STEP, ContactChart, _as_batch
from .core import ConformalFactor, TimeDependentHamiltonian, contact_solve
from .errors import WindowEscape
from .io import format_float
from .norms import contact_norm, uniform_norm

SCHEMES = ("rk4", "euler")


@dataclass(frozen=True)
class IntegratorConfig:
    step: float = 1e-3
    scheme: str = "rk4"
    fd_step: float = FD_STEP

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if not self.fd_step > 0:
            raise ValueError(f"fd_step must be positive, got {self.fd_step}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")

    def halved(self) -> "IntegratorConfig":
        return IntegratorConfig(step=self.step / 2, scheme=self.scheme, fd_step=self.fd_step)


@dataclass
class Trajectory:
    times: np.ndarray
    points: np.ndarray
    h_values: np.ndarray

    def __post_init__(self):
        if not (len(self.times) == len(self.points) == len(self.h_values)):
            raise ValueError("trajectory arrays must have equal lengths")

    @property
    def endpoint(self) -> np.ndarray:
        return self.points[-1]

    def to_csv(self, stream=None) -> str:
        """RFC-4180 CSV with header t,x1,...,xd,h and 17 significant digits."""
        buf = io.StringIO() if stream is None else stream
        d = self.points.shape[1]
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(["t"] + [f"x{i + 1}" for i in range(d)] + ["h"])
        for t, p, h in zip(self.times, self.points, self.h_values):
            writer.writerow([format_float(t)] + [format_float(v) for v in p] + [format_float(h)])
        return buf.getvalue() if stream is None else ""


# -- stepping ---------------------------------------------------------------------


def _rk4(rhs, t, Y, dt):
    k1 = rhs(t, Y)
    k2 = rhs(t + 0.5 * dt, Y + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, Y + 0.5 * dt * k2)
    k4 = rhs(t + dt, Y + dt * k3)
    return Y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _euler(rhs, t, Y, dt):
    return Y + dt * rhs(t, Y)


def _segment_steps(length: float, step: float) -> int:
    return max(1, math.ceil(abs(length) / step - 1e-9))


def integrate_states(rhs, Y0: np.ndarray, t0: float, times: Sequence[float], step: float,
                     scheme: str = "rk4", record_all: bool = False, guard: Optional[Callable] = None):
    """Integrate ``Y' = rhs(t, Y)`` from ``t0`` through the monotone ``times``.

    Returns the states at ``times`` (shape ``(len(times),) + Y0.shape``), or,
    with ``record_all``, ``(all_times, all_states)`` at every step.
    """
    stepper = _rk4 if scheme == "rk4" else _euler
    Y = np.array(Y0, dtype=float, copy=True)
    out = []
    all_t, all_Y = [t0], [Y.copy()]
    a = t0
    for b in times:
        n = _segment_steps(b - a, step)
        dt = (b - a) / n
        for k in range(n):
            Y = stepper(rhs, a + k * dt, Y, dt)
            if guard is not None:
                guard(Y)
            if record_all:
                all_t.append(a + (k + 1) * dt if k + 1 < n else b)
                all_Y.append(Y.copy())
        out.append(Y.copy())
        a = b
    if record_all:
        return np.array(all_t), np.array(all_Y)
    return np.array(out) if out else np.empty((0,) + Y.shape)


def augmented_rhs(chart: ContactChart, H: TimeDependentHamiltonian):
    """Right-hand side of the (x, h) system for a batch of states."""

    def rhs(t, Y):
        x = Y[:, :-1]
        v, g = H.value_and_gradient(t, x)
        XH, _, mu = contact_solve(chart, x, v, g, check=False)
        return np.concatenate([XH, mu[:, None]], axis=1)

    return rhs


def _window_guard(chart: ContactChart):
    idx = [i for i, p in enumerate(chart.periodic) if not p]
    if not idx or not np.isfinite(chart.window):
        return None
    limit = chart.window * (1 + 1e-9) + 1e-12

    def guard(Y):
        if np.abs(Y[:, idx]).max(initial=0.0) > limit:
            raise WindowEscape(f"trajectory left the window [-{chart.window}, {chart.window}] of {chart.name}")

    return guard


def _integrate_points(chart, H, X, t0, times, cfg: "IntegratorConfig", record_all=False):
    """Integrate a batch of points; points outside the declared support of H
    are fixed points of X_H and are not stepped."""
    X = np.asarray(X, dtype=float)
    N, d = X.shape
    times = list(times)
    active = H.active_mask(X)
    Y0 = np.concatenate([X, np.zeros((N, 1))], axis=1)
    guard = _window_guard(chart)
    rhs = augmented_rhs(chart, H)
    if record_all:
        if not active.all():
            all_t, Ya = integrate_states(rhs, Y0[active], t0, times, cfg.step, cfg.scheme, True, guard)
            full = np.broadcast_to(Y0, (len(all_t), N, d + 1)).copy()
            full[:, active] = Ya
            return all_t, full
        return integrate_states(rhs, Y0, t0, times, cfg.step, cfg.scheme, True, guard)
    full = np.broadcast_to(Y0, (len(times), N, d + 1)).copy()
    if active.any():
        full[:, active] = integrate_states(rhs, Y0[active], t0, times, cfg.step, cfg.scheme, False, guard)
    return full


# -- flows ---------------------------------------------------------------------------


def integrate_system(chart: ContactChart, H: TimeDependentHamiltonian, x0, t_end: float,
                     cfg: Optional[IntegratorConfig] = None) -> Trajectory:
    """Trajectory of the augmented (x, h) ODE from ``x0`` over [0, t_end]."""
    cfg = cfg or IntegratorConfig()
    x0 = np.asarray(x0, dtype=float)
    if chart.window < np.inf and not chart.in_window(x0):
        raise WindowEscape(f"initial point {x0} outside the window of {chart.name}")
    if t_end == 0:
        return Trajectory(np.zeros(1), chart.reduce(x0[None]), np.zeros(1))
    ts, Y = _integrate_points(chart, H, x0[None], 0.0, [t_end], cfg, record_all=True)
    Y = Y[:, 0]
    return Trajectory(times=ts, points=chart.reduce(Y[:, :-1]), h_values=Y[:, -1])


def endpoint_error_estimate(chart, H, x0, t_end, cfg: Optional[IntegratorConfig] = None) -> float:
    """Richardson estimate |y_step - y_{step/2}| * 2^p / (2^p - 1) of the endpoint error."""
    cfg = cfg or IntegratorConfig()
    order = 4 if cfg.scheme == "rk4" else 1
    a = integrate_system(chart, H, x0, t_end, cfg)
    b = integrate_system(chart, H, x0, t_end, cfg.halved())
    gap = max(float(chart.distance(a.endpoint, b.endpoint)), abs(a.h_values[-1] - b.h_values[-1]))
    return gap * 2 ** order / (2 ** order - 1)


class FlowMap:
    """phi_H^t and h_t by on-demand integration.

    ``evaluate`` returns ``(phi_t(X), h_t(X))``; ``inverse`` returns
    ``(phi_t^{-1}(X), h_t(phi_t^{-1}(X)))`` by integrating X_H backwards from
    time t to 0.  No state is cached, so repeated calls are bit-identical.
    """

    def __init__(self, chart: ContactChart, hamiltonian: TimeDependentHamiltonian,
                 config: Optional[IntegratorConfig] = None):
        self.chart = chart
        self.hamiltonian = hamiltonian
        self.config = config or IntegratorConfig()

    def __repr__(self):
        return f"FlowMap({self.hamiltonian.name!r} on {self.chart.name})"

    def evaluate(self, t: float, X):
        Xb, single = _as_batch(X)
        if t == 0:
            pts, h = self.chart.reduce(Xb), np.zeros(Xb.shape[0])
        else:
            Y = _integrate_points(self.chart, self.hamiltonian, Xb, 0.0, [t], self.config)[0]
            pts, h = self.chart.reduce(Y[:, :-1]), Y[:, -1]
        return (pts[0], h[0]) if single else (pts, h)

    def evaluate_many(self, times: Sequence[float], X):
        """Forward images at several increasing times in one integration."""
        X = np.asarray(X, dtype=float)
        times = [float(t) for t in times]
        if not times:
            return np.empty((0,) + X.shape), np.empty((0, X.shape[0]))
        if any(b < a for a, b in zip(times, times[1:])) or times[0] < 0:
            raise ValueError("times must be nonnegative and increasing")
        nz = [t for t in times if t > 0]
        pts = np.empty((len(times),) + X.shape)
        hs = np.zeros((len(times), X.shape[0]))
        zero = len(times) - len(nz)
        pts[:zero] = self.chart.reduce(X)
        if nz:
            Y = _integrate_points(self.chart, self.hamiltonian, X, 0.0, nz, self.config)
            pts[zero:] = self.chart.reduce(Y[..., :-1])
            hs[zero:] = Y[..., -1]
        return pts, hs

    def inverse(self, t: float, X):
        Xb, single = _as_batch(X)
        if t == 0:
            pts, h = self.chart.reduce(Xb), np.zeros(Xb.shape[0])
        else:
            Y = _integrate_points(self.chart, self.hamiltonian, Xb, t, [0.0], self.config)[0]
            pts, h = self.chart.reduce(Y[:, :-1]), -Y[:, -1]
        return (pts[0], h[0]) if single else (pts, h)

    def inverse_many(self, times: Sequence[float], X):
        X = np.asarray(X, dtype=float)
        times = [float(t) for t in times]
        pts = np.empty((len(times),) + X.shape)
        hs = np.empty((len(times), X.shape[0]))
        if self.hamiltonian.autonomous and times:
            # autonomous flows: phi_t^{-1} = phi_{-t}, one backward sweep
            order = np.argsort(times)
            neg = [-times[i] for i in order]
            nz = [s for s in neg if s < 0]
            zero = len(neg) - len(nz)
            sweep = np.empty((len(neg),) + X.shape)
            hsweep = np.zeros((len(neg), X.shape[0]))
            sweep[:zero] = self.chart.reduce(X)
            if nz:
                Y = _integrate_points(self.chart, self.hamiltonian, X, 0.0, nz, self.config)
                sweep[zero:] = self.chart.reduce(Y[..., :-1])
                hsweep[zero:] = -Y[..., -1]
            pts[order] = sweep
            hs[order] = hsweep
            return pts, hs
        for i, t in enumerate(times):
            pts[i], hs[i] = self.inverse(t, X)
        return pts, hs

    @property
    def conformal(self) -> ConformalFactor:
        return ConformalFactor(lambda t, X: self.evaluate(t, X)[1], name=f"h[{self.hamiltonian.name}]")


def flow_map(chart: ContactChart, H: TimeDependentHamiltonian, cfg: Optional[IntegratorConfig] = None) -> FlowMap:
    return FlowMap(chart, H, cfg)


@dataclass
class ContactSystem:
    """The triple (flow, Hamiltonian, conformal factor)."""

    flow: object
    hamiltonian: TimeDependentHamiltonian
    conformal: ConformalFactor
    meta: dict = field(default_factory=dict)

    @property
    def chart(self) -> ContactChart:
        return self.flow.chart


def generate_system(chart: ContactChart, H: TimeDependentHamiltonian,
                    cfg: Optional[IntegratorConfig] = None) -> ContactSystem:
    fm = FlowMap(chart, H, cfg)
    return ContactSystem(flow=fm, hamiltonian=H, conformal=fm.conformal)


def inverse_flow(sys: ContactSystem, cfg: Optional[IntegratorConfig] = None) -> ContactSystem:
    """The inverse system: Hbar_t = -e^{-h_t} (H_t o phi_t), hbar_t = -h_t o phi_t^{-1}."""
    cfg = cfg or getattr(sys.flow, "config", None) or IntegratorConfig()
    H = sys.hamiltonian
    flow = sys.flow

    def value(t, X):
        if t == 0:
            return -H(t, X)
        img, h = flow.evaluate(t, X)
        return -np.exp(-h) * H(t, img)

    Hbar = TimeDependentHamiltonian(value, support=H.support, autonomous=False,
                                    name=f"inv({H.name})", fd_step=H.fd_step)

    def hbar(t, X):
        pre, _ = flow.inverse(t, X)
        return -sys.conformal(t, pre)

    return ContactSystem(flow=FlowMap(sys.chart, Hbar, cfg), hamiltonian=Hbar,
                         conformal=ConformalFactor(hbar, name=f"inv({sys.conformal.name})"))


# -- flow-like helpers -------------------------------------------------------------------


class AnalyticFlow:
    """A flow given by closed forms ``forward(t, X) -> (pts, h)`` and
    ``inverse(t, X) -> (pts, h at the preimage)``."""

    def __init__(self, chart: ContactChart, forward, inverse, name: str = "analytic"):
        self.chart = chart
        self._forward = forward
        self._inverse = inverse
        self.name = name

    def evaluate(self, t, X):
        Xb, single = _as_batch(X)
        p, h = self._forward(t, Xb)
        h = np.broadcast_to(np.asarray(h, dtype=float), Xb.shape[:1])
        p = self.chart.reduce(p)
        return (p[0], h[0]) if single else (p, h)

    def inverse(self, t, X):
        Xb, single = _as_batch(X)
        p, h = self._inverse(t, Xb)
        h = np.broadcast_to(np.asarray(h, dtype=float), Xb.shape[:1])
        p = self.chart.reduce(p)
        return (p[0], h[0]) if single else (p, h)

    def evaluate_many(self, times, X):
        res = [self.evaluate(t, X) for t in times]
        return np.array([r[0] for r in res]), np.array([r[1] for r in res])

    def inverse_many(self, times, X):
        res = [self.inverse(t, X) for t in times]
        return np.array([r[0] for r in res]), np.array([r[1] for r in res])


def identity_flow(chart: ContactChart) -> AnalyticFlow:
    zero = lambda t, X: (X.copy(), np.zeros(X.shape[0]))  # noqa: E731
    return AnalyticFlow(chart, zero, zero, name="id")


class ComposedFlow:
    """Pointwise composition t -> outer_t o inner_t."""

    def __init__(self, outer, inner):
        self.outer = outer
        self.inner = inner
        self.chart = outer.chart

    def evaluate(self, t, X):
        p, f = self.inner.evaluate(t, X)
        q, h = self.outer.evaluate(t, p)
        return q, f + h

    def evaluate_many(self, times, X):
        P, F = self.inner.evaluate_many(times, X)
        out_p, out_h = np.empty_like(P), np.empty_like(F)
        for i, t in enumerate(times):
            out_p[i], hh = self.outer.evaluate(t, P[i])
            out_h[i] = F[i] + hh
        return out_p, out_h

    def inverse(self, t, X):
        p, h = self.outer.inverse(t, X)
        q, f = self.inner.inverse(t, p)
        return q, f + h

    def inverse_many(self, times, X):
        P, Hs = _many(self.outer, "inverse", times, X)
        out_p, out_h = np.empty_like(P), np.empty_like(Hs)
        for i, t in enumerate(times):
            out_p[i], f = self.inner.inverse(t, P[i])
            out_h[i] = f + Hs[i]
        return out_p, out_h


def _many(flow, name, times, X):
    fn = getattr(flow, name + "_many", None)
    if fn is not None:
        return fn(times, X)
    single = getattr(flow, name)
    res = [single(t, X) for t in times]
    return np.array([r[0] for r in res]), np.array([r[1] for r in res])


# -- distances --------------------------------------------------------------------------


def c0_distance_terms(flowA, flowB, t_grid, x_grid, include_inverse: bool = True) -> np.ndarray:
    """Per-time forward and inverse sup distances, shape (len(t_grid), 2)."""
    chart = flowA.chart
    X = np.asarray(x_grid, dtype=float)
    times = [float(t) for t in t_grid]
    PA, _ = _many(flowA, "evaluate", times, X)
    PB, _ = _many(flowB, "evaluate", times, X)
    fwd = chart.distance(PA, PB).max(axis=1)
    inv = np.zeros_like(fwd)
    if include_inverse:
        QA, _ = _many(flowA, "inverse", times, X)
        QB, _ = _many(flowB, "inverse", times, X)
        inv = chart.distance(QA, QB).max(axis=1)
    return np.stack([fwd, inv], axis=1)


def c0_distance(flowA, flowB, t_grid, x_grid, include_inverse: bool = True) -> float:
    """max_t [ max_x d(phi^A_t x, phi^B_t x) + max_x d((phi^A_t)^{-1} x, (phi^B_t)^{-1} x) ]."""
    return float(c0_distance_terms(flowA, flowB, t_grid, x_grid, include_inverse).sum(axis=1).max(initial=0.0))


def contact_distance(sysA: ContactSystem, sysB: ContactSystem, t_grid, x_grid,
                     include_inverse: bool = True) -> dict:
    """The three terms of the contact metric, reported separately and summed."""
    c0 = c0_distance(sysA.flow, sysB.flow, t_grid, x_grid, include_inverse)
    conf = uniform_norm(lambda t, X: sysA.conformal(t, X) - sysB.conformal(t, X), t_grid, x_grid)
    ham = contact_norm(lambda t, X: sysA.hamiltonian(t, X) - sysB.hamiltonian(t, X), t_grid, x_grid, sysA.chart)
    return {"c0": c0, "conf": conf, "ham": ham, "total": c0 + conf + ham}
