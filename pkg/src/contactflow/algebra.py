"""Group operations on contact dynamical systems (Phi, H, h).

Composed, inverted and transformed systems carry formula-level
Hamiltonians that are re-integrated, never the stored constituent flows.
Comparing the re-integrated flow with the pointwise construction therefore
checks the group-law formulas rather than restating them.

Product:      (H#F)_t = H_t + (e^{h_t} F_t) o (phi_H^t)^{-1}
              (h#f)_t = f_t + h_t o phi_F^t
Inverse:      Hbar_t = -e^{-h_t} (H_t o phi_H^t),   hbar_t = -h_t o (phi_H^t)^{-1}
Conjugation:  (H^phi)_t = e^{-g} (H_t o phi)
              (h^phi)_t = h_t o phi + g - g o phi^{-1} o phi_H^t o phi
"""
from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .charts import _as_batch
from .core import ConformalFactor, TimeDependentHamiltonian
from .errors import DomainEscape
from .flow import (ComposedFlow, ContactSystem, FlowMap, IntegratorConfig, _many, generate_system,
                   inverse_flow)
from .norms import contact_norm, uniform_norm  # noqa: F401  (re-exported)
from .transforms import ContactTransform


def _config(sys: ContactSystem, cfg: Optional[IntegratorConfig]) -> IntegratorConfig:
    return cfg or getattr(sys.flow, "config", None) or IntegratorConfig()


def _bounding_support(*Hs: TimeDependentHamiltonian):
    if any(H.support is None for H in Hs):
        return None
    return (np.min([H.support[0] for H in Hs], axis=0), np.max([H.support[1] for H in Hs], axis=0))


def _zero_hamiltonian(H: TimeDependentHamiltonian) -> bool:
    return getattr(H, "is_zero", False)


def compose(sysA: ContactSystem, sysB: ContactSystem, cfg: Optional[IntegratorConfig] = None) -> ContactSystem:
    """The product system generated by H#F whose flow is phi_H^t o phi_F^t."""
    if sysA.chart is not sysB.chart and sysA.chart != sysB.chart:
        raise ValueError("systems live on different charts")
    cfg = _config(sysA, cfg)
    H, F = sysA.hamiltonian, sysB.hamiltonian
    if _zero_hamiltonian(F):
        return sysA
    flowA = sysA.flow

    def value(t, X):
        out = H(t, X)
        if t == 0:
            return out + F(t, X)
        pre, h = flowA.inverse(t, X)
        return out + np.exp(h) * F(t, pre)

    HF = TimeDependentHamiltonian(value, support=_bounding_support(H, F), autonomous=False,
                                  name=f"{H.name} # {F.name}", fd_step=min(H.fd_step, F.fd_step))

    def hf(t, X):
        img, f = sysB.flow.evaluate(t, X)
        return f + sysA.conformal(t, img)

    return ContactSystem(flow=FlowMap(sysA.chart, HF, cfg), hamiltonian=HF,
                         conformal=ConformalFactor(hf, name=f"{sysA.conformal.name} # {sysB.conformal.name}"),
                         meta={"pointwise": ComposedFlow(sysA.flow, sysB.flow)})


def invert(sys: ContactSystem, cfg: Optional[IntegratorConfig] = None) -> ContactSystem:
    """The inverse system; identical to :func:`contactflow.flow.inverse_flow`."""
    return inverse_flow(sys, cfg)


class ConjugatedFlow:
    """t -> phi^{-1} o flow_t o phi, with its conformal factor."""

    def __init__(self, flow, phi: ContactTransform):
        self.flow = flow
        self.phi = phi
        self.chart = flow.chart

    def evaluate(self, t, X):
        Xb, single = _as_batch(X)
        p = self.phi.map(Xb)
        q, h = self.flow.evaluate(t, p)
        out = self.chart.reduce(self.phi.inverse_map(q))
        hv = h + self.phi.g(Xb) - self.phi.g(out)
        return (out[0], hv[0]) if single else (out, hv)

    def inverse(self, t, X):
        Xb, single = _as_batch(X)
        p = self.phi.map(Xb)
        q, h = self.flow.inverse(t, p)  # h = h_t at the preimage q
        out = self.chart.reduce(self.phi.inverse_map(q))
        hv = h + self.phi.g(out) - self.phi.g(Xb)
        return (out[0], hv[0]) if single else (out, hv)

    def evaluate_many(self, times, X):
        P, Hs = _many(self.flow, "evaluate", times, self.phi.map(np.asarray(X, dtype=float)))
        gX = self.phi.g(np.asarray(X, dtype=float))
        out = np.array([self.chart.reduce(self.phi.inverse_map(p)) for p in P])
        hv = np.array([h + gX - self.phi.g(o) for h, o in zip(Hs, out)])
        return out, hv

    def inverse_many(self, times, X):
        P, Hs = _many(self.flow, "inverse", times, self.phi.map(np.asarray(X, dtype=float)))
        gX = self.phi.g(np.asarray(X, dtype=float))
        out = np.array([self.chart.reduce(self.phi.inverse_map(p)) for p in P])
        hv = np.array([h + self.phi.g(o) - gX for h, o in zip(Hs, out)])
        return out, hv


def transform(sys: ContactSystem, phi: ContactTransform, cfg: Optional[IntegratorConfig] = None) -> ContactSystem:
    """The conjugated system generated by H^phi = e^{-g} (H o phi)."""
    cfg = _config(sys, cfg)
    chart = sys.chart
    H = sys.hamiltonian
    support = None
    if H.support is not None and phi.affine:
        support = phi.map_box(H.support, inverse=True)
        if chart.window < np.inf and not (np.all(support[0] >= -chart.window) and np.all(support[1] <= chart.window)):
            raise DomainEscape(f"support of {H.name} conjugated by {phi.name} leaves the window of {chart.name}")

    def value(t, X):
        return phi.exp_neg_g(X) * H(t, phi.map(X))

    Hphi = TimeDependentHamiltonian(value, support=support, autonomous=H.autonomous,
                                    name=f"{H.name}^{phi.name}", fd_step=H.fd_step)
    flow = sys.flow

    def hphi(t, X):
        p = phi.map(X)
        img, _ = flow.evaluate(t, p)
        return sys.conformal(t, p) + phi.g(X) - phi.g(phi.inverse_map(img))

    return ContactSystem(flow=FlowMap(chart, Hphi, cfg), hamiltonian=Hphi,
                         conformal=ConformalFactor(hphi, name=f"{sys.conformal.name}^{phi.name}"),
                         meta={"pointwise": ConjugatedFlow(sys.flow, phi)})


class ReparameterizedFlow:
    """t -> flow_{zeta(t)}."""

    def __init__(self, flow, zeta: Callable[[float], float]):
        self.flow = flow
        self.zeta = zeta
        self.chart = flow.chart

    def evaluate(self, t, X):
        return self.flow.evaluate(float(self.zeta(t)), X)

    def inverse(self, t, X):
        return self.flow.inverse(float(self.zeta(t)), X)


def reparameterize(sys: ContactSystem, zeta: Callable[[float], float], dzeta: Callable[[float], float],
                   cfg: Optional[IntegratorConfig] = None) -> ContactSystem:
    """The system generated by H^zeta(t, x) = zeta'(t) H(zeta(t), x); h^zeta_t = h_{zeta(t)}."""
    cfg = _config(sys, cfg)
    H = sys.hamiltonian

    def value(t, X):
        return float(dzeta(t)) * H(float(zeta(t)), X)

    Hz = TimeDependentHamiltonian(value, support=H.support, autonomous=False,
                                  name=f"{H.name}^zeta", fd_step=H.fd_step)
    return ContactSystem(flow=FlowMap(sys.chart, Hz, cfg), hamiltonian=Hz,
                         conformal=ConformalFactor(lambda t, X: sys.conformal(float(zeta(t)), X),
                                                   name=f"{sys.conformal.name}^zeta"),
                         meta={"pointwise": ReparameterizedFlow(sys.flow, zeta)})


def recover_hamiltonian(flow, t: float, X, dt: float = 1e-3) -> np.ndarray:
    """H_t(x) = alpha_x( d/ds psi_s (psi_t^{-1} x) |_{s=t} ) for an isotopy psi.

    The time derivative is a finite difference of the isotopy itself (fourth
    order central when t >= 2 dt, second order one-sided near t = 0), so this
    recovers the generating Hamiltonian from the flow alone.
    """
    chart = flow.chart
    Xb, single = _as_batch(X)
    pre, _ = flow.inverse(t, Xb)
    here, _ = flow.evaluate(t, pre)

    def offset(s):
        return chart.difference(flow.evaluate(t + s, pre)[0], here)

    if t - 2 * dt >= 0:
        v = (8 * (offset(dt) - offset(-dt)) - (offset(2 * dt) - offset(-2 * dt))) / (12 * dt)
    elif t - dt >= 0:
        v = (offset(dt) - offset(-dt)) / (2 * dt)
    else:
        v = (4 * offset(dt) - offset(2 * dt)) / (2 * dt)
    out = np.einsum("ni,ni->n", chart.alpha_at(Xb), v)
    return out[0] if single else out


__all__ = ["compose", "invert", "transform", "reparameterize", "recover_hamiltonian", "ConjugatedFlow",
           "ReparameterizedFlow", "contact_norm", "uniform_norm", "generate_system"]
