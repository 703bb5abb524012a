"""Geodesic flows on the 2-torus as contact Hamiltonian flows.

The reference contact manifold is the flat unit cotangent bundle in angle
coordinates (q1, q2, theta) with alpha = cos(theta) dq1 + sin(theta) dq2.
For a metric g, H_g(q, theta) = sqrt(p^T g*(q) p) with p = (cos theta, sin theta)
generates the flow that the normalizer (q, theta) -> (q, p / H_g) carries to
the unit-speed cogeodesic flow of g.  The Legendre map v = g* p then gives
geodesics in TT^2, which are also integrated directly from the Christoffel
symbols as an independent check.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .charts import FD_STEP, ContactChart, _as_batch, flat_unit_cotangent_torus
from .core import TimeDependentHamiltonian
from .errors import SingularMetric, StepResolutionError
from .flow import FlowMap, IntegratorConfig, integrate_states
from .io import format_float
from .transforms import ContactTransform

TWO_PI = 2.0 * np.pi
DET_FLOOR = 1e-12


@dataclass(frozen=True)
class RiemannianMetric2:
    """Metric coefficients g(q) on T^2 = R^2 / Z^2.

    ``g(Q)`` maps ``(N, 2)`` to ``(N, 2, 2)``; ``dg(Q)`` returns ``(N, 2, 2, 2)``
    with ``dg[n, k, i, j] = d g_ij / d q_k`` and is finite-differenced when
    not supplied.
    """

    g: Callable[[np.ndarray], np.ndarray]
    dg: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "metric"
    fd_step: float = FD_STEP
    params: dict = field(default_factory=dict, compare=False)

    def matrix(self, Q) -> np.ndarray:
        Qb, single = _as_batch(Q)
        G = np.broadcast_to(self.g(Qb), (Qb.shape[0], 2, 2))
        return G[0] if single else G

    def derivative(self, Q) -> np.ndarray:
        Qb, single = _as_batch(Q)
        if self.dg is not None:
            dG = np.broadcast_to(self.dg(Qb), (Qb.shape[0], 2, 2, 2))
        else:
            dG = self.fd_derivative(Qb)
        return dG[0] if single else dG

    def fd_derivative(self, Q) -> np.ndarray:
        Qb, single = _as_batch(Q)
        h = self.fd_step
        dG = np.stack([(self.g(Qb + h * e) - self.g(Qb - h * e)) / (2 * h) for e in np.eye(2)], axis=1)
        return dG[0] if single else dG


def _identity(N: int) -> np.ndarray:
    return np.broadcast_to(np.eye(2), (N, 2, 2))


def scalar_metric(phi: Callable, dphi: Callable, name: str, params: Optional[dict] = None) -> RiemannianMetric2:
    """g = phi(q) I with closed-form derivative."""

    def g(Q):
        return phi(Q)[:, None, None] * _identity(Q.shape[0])

    def dg(Q):
        d = dphi(Q)  # (N, 2)
        return d[:, :, None, None] * np.eye(2)

    return RiemannianMetric2(g, dg, name=name, params=params or {})


def flat_metric() -> RiemannianMetric2:
    return scalar_metric(lambda Q: np.ones(Q.shape[0]), lambda Q: np.zeros(Q.shape), "flat")


def periodic_bump(center=(0.5, 0.5), kappa: float = 2.0):
    """b(q) = exp(kappa (cos 2pi(q1-c1) + cos 2pi(q2-c2) - 2)); b(c) = 1, smooth and periodic."""
    c = np.asarray(center, dtype=float)

    def b(Q):
        return np.exp(kappa * (np.cos(TWO_PI * (Q - c)).sum(axis=1) - 2.0))

    def db(Q):
        return b(Q)[:, None] * (-kappa * TWO_PI * np.sin(TWO_PI * (Q - c)))

    return b, db


def conformal_bump_metric(scale: float = 0.3, center=(0.5, 0.5), kappa: float = 2.0) -> RiemannianMetric2:
    """e^{2 f} I with f = scale * b."""
    b, db = periodic_bump(center, kappa)
    return scalar_metric(lambda Q: np.exp(2 * scale * b(Q)),
                         lambda Q: (2 * scale * np.exp(2 * scale * b(Q)))[:, None] * db(Q),
                         f"conformal-bump({scale:g})", {"scale": scale, "center": tuple(center), "kappa": kappa})


def bump_perturbed_metric(s: float, center=(0.5, 0.5), kappa: float = 2.0) -> RiemannianMetric2:
    """(1 + s b(q)) I."""
    b, db = periodic_bump(center, kappa)
    return scalar_metric(lambda Q: 1.0 + s * b(Q), lambda Q: s * db(Q), f"(1+{s:g}*bump)I", {"s": s})


def oscillatory_metric(a: float, b: float) -> RiemannianMetric2:
    """(1 + a sin(2 pi b q1)) I; needs |a| < 1."""
    if not abs(a) < 1:
        raise SingularMetric(f"oscillation amplitude {a} makes the metric degenerate")

    def phi(Q):
        return 1.0 + a * np.sin(TWO_PI * b * Q[:, 0])

    def dphi(Q):
        out = np.zeros(Q.shape)
        out[:, 0] = a * TWO_PI * b * np.cos(TWO_PI * b * Q[:, 0])
        return out

    return scalar_metric(phi, dphi, f"oscillatory({a:g},{b:g})", {"a": a, "b": b})


@dataclass
class MetricSequence:
    generator: Callable[[int], RiemannianMetric2]
    limit: RiemannianMetric2
    name: str = "sequence"


def bump_sequence(center=(0.5, 0.5), kappa: float = 2.0) -> MetricSequence:
    """g_k = (1 + b/k) I converging to the flat metric."""
    return MetricSequence(lambda k: bump_perturbed_metric(1.0 / k, center, kappa), flat_metric(), "(1+bump/k)I")


# -- pointwise algebra ------------------------------------------------------------------


def cometric(m: RiemannianMetric2, Q) -> np.ndarray:
    Qb, single = _as_batch(Q)
    G = m.matrix(Qb)
    det = G[:, 0, 0] * G[:, 1, 1] - G[:, 0, 1] * G[:, 1, 0]
    if np.any(det < DET_FLOOR):
        raise SingularMetric(f"{m.name} is singular (det {det.min():.3e})")
    inv = np.empty_like(G)
    inv[:, 0, 0] = G[:, 1, 1] / det
    inv[:, 1, 1] = G[:, 0, 0] / det
    inv[:, 0, 1] = -G[:, 0, 1] / det
    inv[:, 1, 0] = -G[:, 1, 0] / det
    return inv[0] if single else inv


def legendre_map(m: RiemannianMetric2, Q, V) -> np.ndarray:
    """p = g(q) v."""
    Qb, single = _as_batch(Q)
    Vb = np.asarray(V, dtype=float).reshape(Qb.shape)
    cometric(m, Qb)  # singularity check
    P = np.einsum("nij,nj->ni", m.matrix(Qb), Vb)
    return P[0] if single else P


def inverse_legendre_map(m: RiemannianMetric2, Q, P) -> np.ndarray:
    """v = g*(q) p."""
    Qb, single = _as_batch(Q)
    Pb = np.asarray(P, dtype=float).reshape(Qb.shape)
    V = np.einsum("nij,nj->ni", cometric(m, Qb), Pb)
    return V[0] if single else V


def _unit(theta):
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def geodesic_hamiltonian(m: RiemannianMetric2) -> TimeDependentHamiltonian:
    """H(q, theta) = sqrt(p^T g*(q) p), p = (cos theta, sin theta), closed-form gradient."""

    def parts(X):
        Q, th = X[:, :2], X[:, 2]
        Gs = cometric(m, Q)
        p = _unit(th)
        Gp = np.einsum("nij,nj->ni", Gs, p)
        return Q, th, Gs, p, Gp, np.sqrt(np.einsum("ni,ni->n", p, Gp))

    def value(t, X):
        return parts(X)[-1]

    def gradient(t, X):
        Q, th, Gs, p, Gp, H = parts(X)
        dG = m.derivative(Q)
        out = np.empty(X.shape)
        # d g* = -g* (d g) g*  =>  p^T d_k g* p = -(g* p)^T d_k g (g* p)
        out[:, :2] = -np.einsum("ni,nkij,nj->nk", Gp, dG, Gp) / (2 * H)[:, None]
        dp = np.stack([-np.sin(th), np.cos(th)], axis=-1)
        out[:, 2] = np.einsum("ni,ni->n", Gp, dp) / H
        return out

    return TimeDependentHamiltonian(value, gradient, autonomous=True, name=f"H[{m.name}]")


def normalizer_map(m: RiemannianMetric2) -> ContactTransform:
    """(q, theta) -> (q, p(theta) / H(q, theta)) into T*T^2, conformal factor -ln H.

    The image lies in the g-unit cotangent bundle; pulling back the Liouville
    form p dq gives alpha / H.
    """
    H = geodesic_hamiltonian(m)

    def fwd(X):
        h = H(0.0, X)
        return np.concatenate([X[:, :2], _unit(X[:, 2]) / h[:, None]], axis=1)

    def inv(Z):
        th = np.mod(np.arctan2(Z[:, 3], Z[:, 2]), TWO_PI)
        return np.concatenate([Z[:, :2], th[:, None]], axis=1)

    return ContactTransform(fwd, inv, lambda X: -np.log(H(0.0, X)), name=f"normalizer[{m.name}]")


def liouville_pullback_residual(m: RiemannianMetric2, X, fd_step: float = FD_STEP) -> np.ndarray:
    """|| (D Phi)^T lambda(Phi x) - e^{g(x)} alpha(x) ||_inf with lambda = p dq."""
    chart = flat_unit_cotangent_torus()
    Phi = normalizer_map(m)
    Xb, single = _as_batch(X)
    img = Phi.map(Xb)
    lam = np.concatenate([img[:, 2:], np.zeros((len(Xb), 2))], axis=1)
    pulled = np.empty(Xb.shape)
    for k in range(3):
        e = np.zeros(3)
        e[k] = fd_step
        col = (Phi.map(Xb + e) - Phi.map(Xb - e)) / (2 * fd_step)
        pulled[:, k] = np.einsum("ni,ni->n", col, lam)
    res = np.abs(pulled - np.exp(Phi.g(Xb))[:, None] * chart.alpha_at(Xb)).max(axis=1)
    return res[0] if single else res


def contact_to_tangent(m: RiemannianMetric2, X) -> np.ndarray:
    """(q, theta) on the reference chart -> (q, v) in TT^2 via normalizer and Legendre."""
    Xb, single = _as_batch(X)
    Z = normalizer_map(m).map(Xb)
    V = inverse_legendre_map(m, Z[:, :2], Z[:, 2:])
    out = np.concatenate([np.mod(Z[:, :2], 1.0), V], axis=1)
    return out[0] if single else out


# -- direct geodesic integration ----------------------------------------------------------


def christoffel(m: RiemannianMetric2, Q) -> np.ndarray:
    """Gamma[n, k, i, j] = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)."""
    Qb, single = _as_batch(Q)
    Gs = cometric(m, Qb)
    dG = m.derivative(Qb)  # [n, l, i, j] = d_l g_ij
    term = (np.einsum("nijl->nijl", dG) + np.einsum("njil->nijl", dG) - np.einsum("nlij->nijl", dG))
    Gam = 0.5 * np.einsum("nkl,nijl->nkij", Gs, term)
    return Gam[0] if single else Gam


def geodesic_rhs(m: RiemannianMetric2):
    def rhs(t, Y):
        Q, V = Y[:, :2], Y[:, 2:]
        acc = -np.einsum("nkij,ni,nj->nk", christoffel(m, Q), V, V)
        return np.concatenate([V, acc], axis=1)

    return rhs


@dataclass
class TangentTrajectory:
    times: np.ndarray
    points: np.ndarray  # (T, 4): q1, q2, v1, v2

    def to_csv(self) -> str:
        lines = ["t,q1,q2,v1,v2"]
        for t, p in zip(self.times, self.points):
            lines.append(",".join(format_float(v) for v in (t, *p)))
        return "\r\n".join(lines) + "\r\n"


def speed_squared(m: RiemannianMetric2, QV) -> np.ndarray:
    QV = np.asarray(QV, dtype=float)
    flat = QV.reshape(-1, 4)
    s = np.einsum("ni,nij,nj->n", flat[:, 2:], m.matrix(flat[:, :2]), flat[:, 2:])
    return s.reshape(QV.shape[:-1])


def geodesic_states(m: RiemannianMetric2, QV0, times: Sequence[float], cfg: Optional[IntegratorConfig] = None):
    """Batched geodesic states (q mod 1, v) at the increasing ``times``."""
    cfg = cfg or IntegratorConfig()
    QV0 = np.asarray(QV0, dtype=float)
    if np.any(np.abs(QV0[:, 2:]).sum(axis=1) == 0):
        raise ValueError("initial velocity must be nonzero")
    nz = [float(t) for t in times if t > 0]
    out = np.broadcast_to(QV0, (len(times),) + QV0.shape).copy()
    if nz:
        out[len(times) - len(nz):] = integrate_states(geodesic_rhs(m), QV0, 0.0, nz, cfg.step, cfg.scheme)
    out[..., :2] = np.mod(out[..., :2], 1.0)
    return out


def geodesic_flow_direct(m: RiemannianMetric2, q0, v0, t_end: float,
                         cfg: Optional[IntegratorConfig] = None) -> TangentTrajectory:
    """Christoffel-ODE geodesic from (q0, v0) recorded at every step."""
    cfg = cfg or IntegratorConfig()
    QV0 = np.concatenate([np.asarray(q0, float), np.asarray(v0, float)])[None]
    if not np.any(QV0[0, 2:] != 0):
        raise ValueError("initial velocity must be nonzero")
    cometric(m, QV0[:, :2])
    if t_end == 0:
        return TangentTrajectory(np.zeros(1), QV0.copy())
    ts, Y = integrate_states(geodesic_rhs(m), QV0, 0.0, [t_end], cfg.step, cfg.scheme, record_all=True)
    Y = Y[:, 0]
    Y[:, :2] = np.mod(Y[:, :2], 1.0)
    return TangentTrajectory(ts, Y)


def tangent_distance(A, B) -> np.ndarray:
    """Distance on TT^2: shortest arc in q, Euclidean in v."""
    dq = np.asarray(A)[..., :2] - np.asarray(B)[..., :2]
    dq -= np.round(dq)
    dv = np.asarray(A)[..., 2:] - np.asarray(B)[..., 2:]
    return np.sqrt((dq ** 2).sum(axis=-1) + (dv ** 2).sum(axis=-1))


def route_discrepancy(m: RiemannianMetric2, x_grid, t_grid, cfg: Optional[IntegratorConfig] = None) -> float:
    """C^0 gap between the contact-Hamiltonian route and the Christoffel route."""
    cfg = cfg or IntegratorConfig()
    chart = flat_unit_cotangent_torus()
    X = np.asarray(x_grid, dtype=float)
    times = [float(t) for t in t_grid]
    pts, _ = FlowMap(chart, geodesic_hamiltonian(m), cfg).evaluate_many(times, X)
    via_contact = np.array([contact_to_tangent(m, p) for p in pts])
    direct = geodesic_states(m, contact_to_tangent(m, X), times, cfg)
    return float(tangent_distance(via_contact, direct).max(initial=0.0))


# -- experiments --------------------------------------------------------------------------


def torus_grid(nq: int = 5, ntheta: int = 8) -> np.ndarray:
    return flat_unit_cotangent_torus().grid((nq, nq, ntheta))


def metric_gap(m: RiemannianMetric2, ref: RiemannianMetric2, Q) -> float:
    return float(np.abs(m.matrix(Q) - ref.matrix(Q)).max(initial=0.0))


def _flow_gaps(chart: ContactChart, Hk, H, x_grid, t_grid, cfg) -> tuple[float, float]:
    """(c0 flow gap with inverses, sup |h_k|) for autonomous Hamiltonians."""
    times = [float(t) for t in t_grid]
    fk, f0 = FlowMap(chart, Hk, cfg), FlowMap(chart, H, cfg)
    Pk, hk = fk.evaluate_many(times, x_grid)
    P0, _ = f0.evaluate_many(times, x_grid)
    Qk, _ = fk.inverse_many(times, x_grid)
    Q0, _ = f0.inverse_many(times, x_grid)
    fwd = chart.distance(Pk, P0).max(axis=1)
    inv = chart.distance(Qk, Q0).max(axis=1)
    return float((fwd + inv).max(initial=0.0)), float(np.abs(hk).max(initial=0.0))


def rigidity_experiment(seq: MetricSequence, k_list: Sequence[int], t_grid, x_grid,
                        cfg: Optional[IntegratorConfig] = None, metric_grid=None, mapper=map) -> list[dict]:
    """Rows (k, sup_metric_gap, ham_gap, conf_gap, c0_flow_gap) against the limit metric.

    ``mapper`` evaluates the independent rows (``map`` or an executor's map).
    """
    cfg = cfg or IntegratorConfig()
    chart = flat_unit_cotangent_torus()
    X = np.asarray(x_grid, dtype=float)
    Qm = X[:, :2] if metric_grid is None else np.asarray(metric_grid, dtype=float)
    H = geodesic_hamiltonian(seq.limit)

    def row(k):
        mk = seq.generator(k)
        Hk = geodesic_hamiltonian(mk)
        c0, conf = _flow_gaps(chart, Hk, H, X, t_grid, cfg)
        return {"k": int(k), "sup_metric_gap": metric_gap(mk, seq.limit, Qm),
                "ham_gap": float(np.abs(Hk(0.0, X) - H(0.0, X)).max(initial=0.0)),
                "conf_gap": conf, "c0_flow_gap": c0}

    return list(mapper(row, k_list))


def counterexample_metric(k: int) -> RiemannianMetric2:
    """(1 + a_k sin(2 pi b_k q1)) I with a_k = 1/k, b_k = k^2."""
    return oscillatory_metric(1.0 / k, float(k * k))


def counterexample_experiment(k_list: Sequence[int], t_grid, x_grid,
                              cfg: Optional[IntegratorConfig] = None, mapper=map) -> list[dict]:
    """Rows as in :func:`rigidity_experiment` for the C^0-small, C^1-large family."""
    cfg = cfg or IntegratorConfig()
    chart = flat_unit_cotangent_torus()
    X = np.asarray(x_grid, dtype=float)
    flat = flat_metric()
    H = geodesic_hamiltonian(flat)
    for k in k_list:
        if k < 2:
            raise ValueError("the counterexample family starts at k = 2")
        if not cfg.step < 1.0 / (10 * k * k):
            raise StepResolutionError(f"step {cfg.step:g} does not resolve oscillation frequency {k * k} "
                                      f"(need step < {1.0 / (10 * k * k):.3g})")

    def row(k):
        b = k * k
        mk = counterexample_metric(k)
        # q1 nodes on the crests of sin(2 pi b q1), where the metric gap is attained
        crest = (np.arange(b) + 0.25) / b
        Qm = np.stack(np.meshgrid(crest, np.linspace(0, 1, 5, endpoint=False), indexing="ij"), -1).reshape(-1, 2)
        Hk = geodesic_hamiltonian(mk)
        c0, conf = _flow_gaps(chart, Hk, H, X, t_grid, cfg)
        # the coarse flow grid can alias with the oscillation; measure H on the crests
        Xm = np.concatenate([np.repeat(Qm, 8, axis=0), np.tile(np.arange(8) * TWO_PI / 8, len(Qm))[:, None]], axis=1)
        return {"k": int(k), "sup_metric_gap": metric_gap(mk, flat, Qm),
                "ham_gap": float(np.abs(Hk(0.0, Xm) - H(0.0, Xm)).max(initial=0.0)),
                "conf_gap": conf, "c0_flow_gap": c0}

    return list(mapper(row, k_list))


def counterexample_floor(rows: Sequence[dict], fraction: float = 0.9) -> float:
    """The reported floor delta: a fixed fraction of the smallest flow gap."""
    return fraction * min(r["c0_flow_gap"] for r in rows)
