"""Batched small dense linear algebra.

Every contact-geometric solve in the package is a tiny overdetermined system
(at most 6 x 5) evaluated at thousands of points at once.  LAPACK's stacked
routines pay a per-matrix overhead that dominates at these sizes, so the
Householder QR below is vectorized across the batch instead.
"""
from __future__ import annotations

import numpy as np


def qr_lstsq(A: np.ndarray, B: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Least-squares solve of ``A[n] @ X[n] = B[n]`` for a stack of systems.

    Parameters
    ----------
    A : (N, m, d) array with m >= d
    B : (N, m) or (N, m, k) array of right-hand sides

    Returns
    -------
    X : (N, d) or (N, d, k) least-squares solutions
    residual : (N,) or (N, k) Euclidean norm of ``A X - B``
    rdiag : (N, d) diagonal of the triangular factor (rank diagnostics)
    """
    single = B.ndim == 2
    if single:
        B = B[..., None]
    a = np.array(np.moveaxis(A, 0, -1), dtype=float, order="C", copy=True)  # (m, d, N)
    b = np.array(np.moveaxis(B, 0, -1), dtype=float, order="C", copy=True)  # (m, k, N)
    m, d, _ = a.shape
    if m < d:
        raise ValueError("qr_lstsq needs at least as many rows as columns")
    for j in range(d):
        col = a[j:, j]
        norm = np.sqrt((col * col).sum(axis=0))
        sign = np.where(col[0] >= 0.0, 1.0, -1.0)
        v = col.copy()
        v[0] += sign * norm
        vv = (v * v).sum(axis=0)
        scale = np.where(vv > 0.0, 2.0 / np.where(vv > 0.0, vv, 1.0), 0.0)
        w = (v[:, None, :] * a[j:, j:]).sum(axis=0) * scale
        a[j:, j:] -= v[:, None, :] * w[None]
        wb = (v[:, None, :] * b[j:]).sum(axis=0) * scale
        b[j:] -= v[:, None, :] * wb[None]
    x = np.empty((d,) + b.shape[1:])
    for i in range(d - 1, -1, -1):
        acc = b[i].copy()
        for k in range(i + 1, d):
            acc -= a[i, k] * x[k]
        x[i] = acc / a[i, i]
    residual = np.sqrt((b[d:] ** 2).sum(axis=0))
    rdiag = np.stack([a[i, i] for i in range(d)])
    X = np.moveaxis(x, -1, 0)
    residual = np.moveaxis(residual, -1, 0)
    if single:
        X = X[..., 0]
        residual = residual[..., 0]
    return X, residual, np.moveaxis(rdiag, -1, 0)


def pfaffian(M: np.ndarray) -> np.ndarray:
    """Pfaffian of a stack of antisymmetric matrices by cofactor expansion.

    Only meant for the small sizes used by the volume-density computation
    (even size <= 6).  ``M`` has shape (..., 2k, 2k).
    """
    size = M.shape[-1]
    if size % 2:
        return np.zeros(M.shape[:-2])
    if size == 0:
        return np.ones(M.shape[:-2])
    if size == 2:
        return M[..., 0, 1]
    total = np.zeros(M.shape[:-2])
    for j in range(1, size):
        keep = [i for i in range(size) if i not in (0, j)]
        minor = M[..., keep, :][..., :, keep]
        total = total + (-1) ** (j + 1) * M[..., 0, j] * pfaffian(minor)
    return total
