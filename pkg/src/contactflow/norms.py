"""The contact norm of Hamiltonians and the uniform norm of conformal factors,
evaluated on finite time and space grids."""
from __future__ import annotations

import numpy as np

from .charts import ContactChart, volume_density_coefficient

DEFAULT_TIME_NODES = 101


def default_t_grid(nodes: int = DEFAULT_TIME_NODES) -> np.ndarray:
    return np.linspace(0.0, 1.0, nodes)


def _trapezoid(y, x):
    if len(x) == 1:
        return float(y[0])
    return float(np.trapezoid(y, x))


def contact_norm(H, t_grid, x_grid, chart: ContactChart) -> float:
    """int_0^1 (max_x H_t - min_x H_t + |mean_nu H_t|) dt.

    The mean uses the contact volume density as weights over ``x_grid``
    (normalized by the total weight, so only the grid region matters).
    A single-node ``t_grid`` is read as an autonomous field over unit time.
    """
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    X = np.asarray(x_grid, dtype=float)
    nu = np.abs(volume_density_coefficient(chart, X))
    integrand = np.empty(len(t_grid))
    for i, t in enumerate(t_grid):
        v = np.asarray(H(t, X), dtype=float)
        integrand[i] = v.max() - v.min() + abs(float((v * nu).sum() / nu.sum()))
    return _trapezoid(integrand, t_grid)


def uniform_norm(h, t_grid, x_grid) -> float:
    """max |h(t, x)| over the grids."""
    X = np.asarray(x_grid, dtype=float)
    return float(max(np.abs(np.asarray(h(t, X), dtype=float)).max(initial=0.0)
                     for t in np.atleast_1d(t_grid)))


def hofer_length(field, t_grid, samples) -> float:
    """int (max - min) dt of a time-dependent scalar field over ``samples``."""
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    S = np.asarray(samples, dtype=float)
    osc = np.array([np.ptp(np.asarray(field(t, S), dtype=float)) for t in t_grid])
    return _trapezoid(osc, t_grid)
