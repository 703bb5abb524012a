"""Contact diffeomorphisms given by closed forms."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Optional

import numpy as np

from .charts import FD_STEP, ContactChart, _as_batch


@dataclass(frozen=True)
class ContactTransform:
    """phi with phi^* alpha = e^g alpha.

    ``map``, ``inverse_map`` and ``conformal`` (= g) act on ``(N, dim)``
    batches.  ``scale`` optionally gives e^{-g} in closed form so that
    transformed Hamiltonians can be exact.  ``affine`` marks maps for which
    the image of a box is the bounding box of its mapped corners.
    """

    map: Callable[[np.ndarray], np.ndarray]
    inverse_map: Callable[[np.ndarray], np.ndarray]
    conformal: Callable[[np.ndarray], np.ndarray]
    scale: Optional[Callable[[np.ndarray], np.ndarray]] = None
    affine: bool = False
    name: str = "phi"

    def __call__(self, X) -> np.ndarray:
        Xb, single = _as_batch(X)
        out = self.map(Xb)
        return out[0] if single else out

    def inv(self, X) -> np.ndarray:
        Xb, single = _as_batch(X)
        out = self.inverse_map(Xb)
        return out[0] if single else out

    def g(self, X) -> np.ndarray:
        Xb, single = _as_batch(X)
        out = np.broadcast_to(np.asarray(self.conformal(Xb), dtype=float), Xb.shape[:1])
        return out[0] if single else out

    def exp_neg_g(self, X) -> np.ndarray:
        Xb, single = _as_batch(X)
        if self.scale is not None:
            out = np.broadcast_to(np.asarray(self.scale(Xb), dtype=float), Xb.shape[:1])
        else:
            out = np.exp(-self.g(Xb))
        return out[0] if single else out

    def inverse(self) -> "ContactTransform":
        """phi^{-1}, whose conformal factor is -g o phi^{-1}."""
        fwd, inv, g, scale = self.map, self.inverse_map, self.conformal, self.scale
        inv_scale = None if scale is None else (lambda X: 1.0 / scale(inv(X)))
        return ContactTransform(inv, fwd, lambda X: -g(inv(X)), inv_scale, self.affine,
                                f"inverse({self.name})")

    def map_box(self, box, inverse: bool = False):
        """Bounding box of the image of ``box`` (exact for affine maps)."""
        if not self.affine:
            raise ValueError(f"{self.name} is not affine; box images are not available")
        lo, hi = (np.asarray(b, dtype=float) for b in box)
        corners = np.array(list(product(*zip(lo, hi))))
        img = (self.inverse_map if inverse else self.map)(corners)
        return img.min(axis=0), img.max(axis=0)


def identity_transform() -> ContactTransform:
    zero = lambda X: np.zeros(np.asarray(X).shape[:-1])  # noqa: E731
    one = lambda X: np.ones(np.asarray(X).shape[:-1])  # noqa: E731
    ident = lambda X: np.array(X, dtype=float, copy=True)  # noqa: E731
    return ContactTransform(ident, ident, zero, one, affine=True, name="id")


def dilation(lam: float) -> ContactTransform:
    """delta_lam(x', z) = (lam x', lam^2 z) on a Heisenberg chart; g = 2 ln lam."""
    lam = float(lam)
    if not lam > 0:
        raise ValueError(f"dilation factor must be positive, got {lam}")

    def weights(X):
        w = np.full(np.asarray(X).shape[-1], lam)
        w[-1] = lam * lam
        return w

    g = 2.0 * np.log(lam)
    s = lam ** -2
    return ContactTransform(lambda X: X * weights(X), lambda X: X / weights(X),
                            lambda X: np.full(np.asarray(X).shape[:-1], g),
                            lambda X: np.full(np.asarray(X).shape[:-1], s),
                            affine=True, name=f"dilation({lam:g})")


def transform_pullback_residual(chart: ContactChart, phi: ContactTransform, X,
                                fd_step: float = FD_STEP) -> np.ndarray:
    """|| (D phi)^T alpha(phi x) - e^{g(x)} alpha(x) ||_inf per point (FD Jacobian)."""
    Xb, single = _as_batch(X)
    N, d = Xb.shape
    res = np.zeros((N, d))
    for k in range(d):
        e = np.zeros(d)
        e[k] = fd_step
        col = chart.difference(phi.map(Xb + e), phi.map(Xb - e)) / (2 * fd_step)  # d phi / d x_k
        res[:, k] = np.einsum("ni,ni->n", col, chart.alpha_at(phi.map(Xb)))
    out = np.abs(res - np.exp(phi.g(Xb))[:, None] * chart.alpha_at(Xb)).max(axis=1)
    return out[0] if single else out
