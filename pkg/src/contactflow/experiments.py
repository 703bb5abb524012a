"""Named verification experiments driven by an :class:`ExperimentConfig`.

Each experiment returns an :class:`ExperimentResult`: one CSV table, a JSON
summary and a list of invariant assertions.  Table and summary bodies depend
only on the configuration (including its seed), never on wall-clock time or
on the order in which parallel rows finish.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import geodesic as geo
from .algebra import compose, invert, recover_hamiltonian, transform
from .charts import ContactChart, flat_unit_cotangent_torus, standard_heisenberg, volume_density_coefficient
from .core import TimeDependentHamiltonian, pullback_residual
from .config import ExperimentConfig
from .errors import ConfigError
from .flow import IntegratorConfig, c0_distance, endpoint_error_estimate, generate_system, integrate_system
from .heisenberg import (cutoff_translation_hamiltonian, midpoint_nodes, mollify, polynomial_kernel,
                         riemann_nodes, riemann_sum_translate, right_translation, translation_hamiltonian)
from .io import csv_text, records_csv
from .norms import contact_norm, hofer_length, uniform_norm
from .presets import PRESETS, build_preset
from .symplectization import SYMPLECTIC_SIGN, lift_discrepancy
from .transforms import transform_pullback_residual

THREADS_ENV = "CONTACTFLOW_THREADS"

# Per-experiment integrator steps used when [integrator] gives none.  Group
# experiments integrate Hamiltonians that themselves integrate flows, so
# they default to coarser (still well-resolved) steps.
DEFAULT_STEPS = {"verify-group": 2e-2, "verify-transform": 1e-2}

CONVENTIONS = {
    "c0_distance": "max over t of [sup_x d(phi_t x, psi_t x) + sup_x d(phi_t^-1 x, psi_t^-1 x)]",
    "conformal_factor": "phi_t^* alpha = e^{h_t} alpha",
    "inverse_flows": "backward integration of the same vector field",
    "symplectic_form": "omega = -d(e^theta alpha), lift Hhat = e^theta H",
    "symplectization_sign": SYMPLECTIC_SIGN,
    "contact_norm_mean": ("contact-volume-weighted mean over the spatial grid inside the chart window; equals a closed-manifold "
                          "mean only up to the total-mass normalization (unresolved)"),
    "riemann_nodes": "tensor midpoint nodes in the unit ball, weights normalized to sum 1",
    "heisenberg_product": "(x', z)(y', w) = (x' + y', z + w + 1/2 Im<x', y'>)",
}


@dataclass
class Assertion:
    name: str
    passed: bool
    value: object
    bound: object
    relation: str

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "value": self.value, "bound": self.bound,
                "relation": self.relation}

    def report(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.value!r} {self.relation} {self.bound!r}"


@dataclass
class ExperimentResult:
    name: str
    table: str
    summary: dict
    assertions: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)


def below(name, value, bound) -> Assertion:
    value = float(value)
    return Assertion(name, bool(value < bound), value, bound, "<")


def above(name, value, bound) -> Assertion:
    value = float(value)
    return Assertion(name, bool(value > bound), value, bound, ">")


def strictly_decreasing(name, values) -> Assertion:
    vals = [float(v) for v in values]
    return Assertion(name, all(b < a for a, b in zip(vals, vals[1:])), vals, "strictly decreasing", "is")


# -- context -------------------------------------------------------------------------


def thread_count() -> int:
    """Worker cap from CONTACTFLOW_THREADS (0 = serial); defaults to the CPU count."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be a nonnegative integer, got {raw!r}") from exc
    if n < 0:
        raise ConfigError(f"{THREADS_ENV} must be a nonnegative integer, got {raw!r}")
    return n


def ordered_map(fn: Callable, items) -> list:
    """map over independent rows, threaded up to the cap; results keep input order."""
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def build_chart(cfg: ExperimentConfig) -> ContactChart:
    ch = cfg.chart
    if ch["kind"] == "flat_torus":
        return flat_unit_cotangent_torus()
    return standard_heisenberg(int(ch.get("n", 1)), float(ch.get("window", 2.0)))


def _build(section: Optional[dict], metric: Optional[dict] = None):
    if section is None:
        return None
    params = dict(section["params"])
    if section["preset"] == "geodesic" and metric is not None and "metric" not in params:
        params["metric"] = build_preset(metric["preset"], **metric["params"])
    try:
        return build_preset(section["preset"], **params)
    except (ValueError, TypeError, OSError) as exc:
        raise ConfigError(f"cannot build preset {section['preset']!r}: {exc}") from exc


def build_hamiltonian(cfg: ExperimentConfig, which: str = "hamiltonian") -> Optional[TimeDependentHamiltonian]:
    return _build(getattr(cfg, which), cfg.metric)


def build_integrator(cfg: ExperimentConfig) -> IntegratorConfig:
    ig = cfg.integrator
    step = float(ig.get("step", DEFAULT_STEPS.get(cfg.name, 1e-3)))
    kw = {"step": step, "scheme": ig.get("scheme", "rk4")}
    if "fd_step" in ig:
        kw["fd_step"] = float(ig["fd_step"])
    return IntegratorConfig(**kw)


def _check_dim(chart: ContactChart, H: TimeDependentHamiltonian):
    probe = np.zeros((1, chart.dim)) + 0.25
    try:
        v = np.asarray(H(0.0, probe))
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"Hamiltonian {H.name} does not fit the {chart.dim}-dimensional chart: {exc}") from exc
    if v.shape != (1,):
        raise ConfigError(f"Hamiltonian {H.name} does not fit the {chart.dim}-dimensional chart")


def spatial_grid(chart: ContactChart, n: int, margin: float, *Hs) -> np.ndarray:
    """Tensor grid of cell centers over the bounding support box of the
    Hamiltonians when they all have one (clipped to the window shrunk by
    ``margin``), else the chart grid over the window."""
    boxes = [H.support for H in Hs if H is not None]
    if Hs and len(boxes) == len(Hs) and all(b is not None for b in boxes) and not any(chart.periodic):
        lo = np.max([np.min([b[0] for b in boxes], axis=0), np.full(chart.dim, -chart.window + margin)], axis=0)
        hi = np.min([np.max([b[1] for b in boxes], axis=0), np.full(chart.dim, chart.window - margin)], axis=0)
        axes = [a + (np.arange(n) + 0.5) * (b - a) / n for a, b in zip(lo, hi)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=-1)
    return chart.grid(n, margin)


def time_grid(cfg: ExperimentConfig, nodes: int) -> np.ndarray:
    return np.linspace(0.0, float(cfg.get("t_end", 1.0)), int(cfg.get("t_nodes", nodes)))


def _default_start(chart: ContactChart) -> np.ndarray:
    return np.array([0.5, 0.5, 0.0]) if any(chart.periodic) else np.zeros(chart.dim)


# -- experiments -------------------------------------------------------------------------


def run_flow(cfg: ExperimentConfig) -> ExperimentResult:
    """Trajectory of one point with the conformal factor, plus pointwise invariants."""
    chart = build_chart(cfg)
    H = build_hamiltonian(cfg)
    _check_dim(chart, H)
    ic = build_integrator(cfg)
    x0 = np.asarray(cfg.get("x0", _default_start(chart)), dtype=float).reshape(-1)
    t_end = float(cfg.get("t_end", 1.0))
    traj = integrate_system(chart, H, x0, t_end, ic)
    assertions = [Assertion("conformal factor starts at 0", traj.h_values[0] == 0.0, float(traj.h_values[0]),
                            0.0, "==")]
    err = endpoint_error_estimate(chart, H, x0, t_end, ic)
    assertions.append(below("Richardson endpoint error", err, 1e-6))
    summary = {"hamiltonian": H.name, "chart": chart.name, "x0": x0, "t_end": t_end,
               "endpoint": traj.endpoint, "h_end": float(traj.h_values[-1]), "endpoint_error": err}
    if chart.window == np.inf or np.all(chart.in_window(x0, margin=10 * ic.fd_step)):
        flow = generate_system(chart, H, ic).flow
        res = float(pullback_residual(chart, flow, None, t_end, x0, fd_step=ic.fd_step))
        summary["pullback_residual"] = res
        assertions.append(below("pullback residual at t_end", res, 1e-5))
    if H.autonomous:
        # energy identity H(phi_t x) = e^{h_t} H(x) along the recorded trajectory
        energy = np.abs(H(0.0, traj.points) - np.exp(traj.h_values) * H(0.0, x0[None])[0]).max()
        summary["energy_identity_error"] = float(energy)
        assertions.append(below("energy identity H o phi_t = e^h H", energy, 1e-6))
    table = traj.to_csv()
    return ExperimentResult("flow", table, summary, assertions)


def run_verify_group(cfg: ExperimentConfig) -> ExperimentResult:
    """Integrated product/inverse systems against their pointwise constructions."""
    chart = build_chart(cfg)
    H, F = build_hamiltonian(cfg), build_hamiltonian(cfg, "hamiltonian2")
    _check_dim(chart, H)
    _check_dim(chart, F)
    ic = build_integrator(cfg)
    include_inverse = bool(cfg.get("include_inverse", True))
    X = spatial_grid(chart, int(cfg.get("grid", 3)), float(cfg.get("margin", 0.0)), H, F)
    ts = time_grid(cfg, 3)
    A, B = generate_system(chart, H, ic), generate_system(chart, F, ic)
    AB = compose(A, B, ic)
    Ainv = invert(A, ic)
    times = [float(t) for t in ts]

    def sup_dist(P, Q):
        return chart.distance(P, Q).max(axis=-1)

    # each flow is integrated once; every term reads from these arrays
    def product_terms():
        if AB is A:  # F = 0: the product is A itself
            return 0.0, 0.0
        pointwise = AB.meta["pointwise"]
        P, hP = AB.flow.evaluate_many(times, X)
        gap = sup_dist(P, pointwise.evaluate_many(times, X)[0])
        if include_inverse:
            gap = gap + sup_dist(AB.flow.inverse_many(times, X)[0], pointwise.inverse_many(times, X)[0])
        conf = max(float(np.abs(AB.conformal(t, X) - h).max()) for t, h in zip(times, hP))
        return float(gap.max()), conf

    def inverse_terms():
        Q, hQ = Ainv.flow.evaluate_many(times, X)
        back = np.array([A.flow.evaluate(t, q)[0] for t, q in zip(times, Q)])
        gap = sup_dist(back, X[None])
        if include_inverse:
            pre = np.array([Ainv.flow.inverse(t, A.flow.inverse(t, X)[0])[0] for t in times])
            gap = gap + sup_dist(pre, X[None])
        conf = max(float(np.abs(Ainv.conformal(t, X) - h).max()) for t, h in zip(times, hQ))
        return float(gap.max()), conf

    (c0_prod, conf_prod), (c0_inv, conf_inv) = ordered_map(lambda f: f(), [product_terms, inverse_terms])
    values = [c0_prod, c0_inv, conf_prod, conf_inv]
    names = ["c0 product vs composition", "c0 phi o phi^-1 vs identity", "conformal h#f formula",
             "conformal hbar formula"]
    tol = 1e-5
    rows = [(n, v, tol) for n, v in zip(names, values)]
    table = csv_text(["term", "value", "tolerance"], rows)
    summary = {"hamiltonian": H.name, "hamiltonian2": F.name, "grid_points": len(X), "times": ts,
               "include_inverse": include_inverse, "step": ic.step,
               "records": [{"term": t, "value": v} for t, v in zip(("c0", "c0", "conf", "conf"), values)],
               "terms": {n: v for n, v in zip(names, values)}}
    return ExperimentResult("verify-group", table, summary, [below(n, v, tol) for n, v in zip(names, values)])


def run_verify_transform(cfg: ExperimentConfig) -> ExperimentResult:
    """Flow of H^phi against phi^-1 o Phi_H o phi, conformal factors and the recovered Hamiltonian."""
    chart = build_chart(cfg)
    H = build_hamiltonian(cfg)
    _check_dim(chart, H)
    phi = _build(cfg.transform)
    ic = build_integrator(cfg)
    ts = time_grid(cfg, 3)
    sys = generate_system(chart, H, ic)
    T = transform(sys, phi, ic)
    X = spatial_grid(chart, int(cfg.get("grid", 3)), float(cfg.get("margin", 0.0)), T.hamiltonian)
    X = X[chart.in_window(phi.map(X))]
    pointwise = T.meta["pointwise"]
    c0 = c0_distance(T.flow, pointwise, ts, X, bool(cfg.get("include_inverse", True)))
    conf = uniform_norm(lambda t, Y: T.conformal(t, Y) - T.flow.evaluate(t, Y)[1], ts, X)
    t_mid = float(ts[len(ts) // 2]) if len(ts) > 1 else 0.0
    recovered = recover_hamiltonian(pointwise, t_mid, X, dt=1e-2)
    ham = float(np.abs(recovered - T.hamiltonian(t_mid, X)).max(initial=0.0))
    names = ["c0 H^phi flow vs conjugated flow", "conformal h^phi formula", "recovered Hamiltonian vs H^phi"]
    values = [c0, conf, ham]
    tols = [1e-5, 1e-5, 1e-6]
    table = csv_text(["term", "value", "tolerance"], zip(names, values, tols))
    summary = {"hamiltonian": H.name, "transform": phi.name, "grid_points": len(X), "times": ts,
               "recovery_time": t_mid, "terms": dict(zip(names, values)),
               "records": [{"term": t, "value": v} for t, v in zip(("c0", "conf", "ham"), values)]}
    return ExperimentResult("verify-transform", table, summary,
                            [below(n, v, t) for n, v, t in zip(names, values, tols)])


def cone_function(radius: float = 1.0) -> Callable:
    """Lipschitz test function max(0, 1 - |x| / radius) with its kink at the origin."""

    def F(X):
        return np.maximum(0.0, 1.0 - np.sqrt((np.asarray(X) ** 2).sum(axis=-1)) / radius)

    return F


def smooth_test_function(X) -> np.ndarray:
    """Smooth test function for quadrature refinement."""
    X = np.asarray(X, dtype=float)
    return np.exp(-(X ** 2).sum(axis=-1)) * np.cos(X[..., 0] - 0.5 * X[..., -1])


def _require_heisenberg(chart: ContactChart, name: str):
    if chart.meta.get("kind") != "heisenberg":
        raise ConfigError(f"experiment {name!r} needs a heisenberg chart")


def run_mollify(cfg: ExperimentConfig) -> ExperimentResult:
    """sup |F * K_eps - F| for a Lipschitz cone as eps halves."""
    chart = build_chart(cfg)
    _require_heisenberg(chart, "mollify")
    kernel = polynomial_kernel(chart.dim)
    eps_list = [float(e) for e in cfg.get("epsilons", (0.2, 0.1, 0.05, 0.025))]
    radius = 1.0
    F = cone_function(radius)
    n = int(cfg.get("grid", 9))
    n += 1 - n % 2  # odd, so the kink at the origin is a grid node
    lim = radius + 0.1
    X = np.stack([g.ravel() for g in np.meshgrid(*[np.linspace(-lim, lim, n)] * chart.dim, indexing="ij")], -1)
    box = (np.full(chart.dim, -radius), np.full(chart.dim, radius))
    quad = int(cfg.get("quad_nodes", 15))
    errors = ordered_map(lambda e: float(np.abs(mollify(F, kernel, e, X, support=box, window=chart.window,
                                                        per_axis=quad) - F(X)).max()), eps_list)
    nodes = len(midpoint_nodes(kernel, quad)[0])
    rows, ratios = [], []
    for i, (e, err) in enumerate(zip(eps_list, errors)):
        ratio = errors[i - 1] / err if i else float("nan")
        if i:
            ratios.append((eps_list[i - 1] / e, ratio))
        rows.append((e, err, nodes, ratio))
    table = csv_text(["epsilon", "sup_error", "nodes", "ratio_to_previous"], rows)
    assertions = []
    for (scale, ratio), e in zip(ratios, eps_list[1:]):
        expected = scale
        assertions.append(Assertion(f"error ratio at eps={e:g} within 20% of {expected:g}",
                                    bool(abs(ratio / expected - 1) <= 0.2), ratio,
                                    [0.8 * expected, 1.2 * expected], "in"))
    summary = {"test_function": f"cone radius {radius:g}", "kernel_integral": kernel.total_integral,
               "quad_nodes_per_axis": quad, "grid_points": len(X), "errors": dict(zip(map(str, eps_list), errors))}
    return ExperimentResult("mollify", table, summary, assertions)


def run_riemann_sum(cfg: ExperimentConfig) -> ExperimentResult:
    """Riemann sums of right translates against the convolution, plus the
    translation facts they rest on."""
    chart = build_chart(cfg)
    _require_heisenberg(chart, "riemann-sum")
    rng = np.random.default_rng(cfg.seed)
    kernel = polynomial_kernel(chart.dim)
    eps = float(cfg.get("epsilons", (0.5,))[0])
    # nested refinement: halving the node spacing keeps the error monotone,
    # whereas odd/even node counts interleave differently with the ball boundary
    levels = [int(m) for m in cfg.get("levels", (2, 4, 8, 16))]
    ref_nodes = int(cfg.get("reference_nodes", 64))
    if any(b <= a for a, b in zip(levels, levels[1:])) or ref_nodes <= levels[-1]:
        raise ConfigError("levels must increase and stay below reference_nodes")
    X = chart.grid(int(cfg.get("grid", 3)), float(cfg.get("margin", 1.0)))
    reference = mollify(smooth_test_function, kernel, eps, X, per_axis=ref_nodes)
    sums = ordered_map(lambda m: riemann_sum_translate(smooth_test_function, riemann_nodes(kernel, eps, m))(X),
                       levels)
    dists = [float(np.abs(s - reference).max()) for s in sums]
    rows = [(m, len(midpoint_nodes(kernel, m)[0]), d) for m, d in zip(levels, dists)]
    table = csv_text(["nodes_per_axis", "nodes", "sup_distance"], rows)
    assertions = [strictly_decreasing("Riemann-sum distance under refinement", dists)]

    ic = build_integrator(cfg)
    delta = float(cfg.get("delta", 0.2))
    taus = rng.uniform(-1.0, 1.0, (3, chart.dim))
    taus *= (delta * rng.uniform(0.3, 1.0, (3, 1))) / np.linalg.norm(taus, axis=1, keepdims=True)
    S = rng.uniform(-0.5, 0.5, (int(cfg.get("samples", 20)), chart.dim))
    pull = max(float(transform_pullback_residual(chart, right_translation(tau), S, fd_step=1e-3).max())
               for tau in taus)
    assertions.append(below("right translation pullback residual", pull, 1e-10))

    def translation_gaps(tau):
        Ft = generate_system(chart, translation_hamiltonian(tau), ic).flow
        R = right_translation(tau)
        pts, _ = Ft.evaluate(1.0, S)
        direct = float(chart.distance(pts, R(S)).max())
        G = cutoff_translation_hamiltonian(tau, (np.full(chart.dim, -0.5), np.full(chart.dim, 0.5)), delta,
                                           chart.window)
        pts, _ = generate_system(chart, G, ic).flow.evaluate(1.0, S)
        return direct, float(chart.distance(pts, R(S)).max())

    gaps = ordered_map(translation_gaps, list(taus))
    direct = max(g[0] for g in gaps)
    cut = max(g[1] for g in gaps)
    assertions.append(below("flow of F^tau vs right translation", direct, 1e-6))
    assertions.append(below("flow of cut-off F^tau on supp F vs right translation", cut, 1e-5))
    summary = {"epsilon": eps, "reference_nodes_per_axis": ref_nodes, "grid_points": len(X),
               "distances": dict(zip(map(str, levels), dists)), "taus": taus, "pullback_residual": pull,
               "translation_flow_gap": direct, "cutoff_flow_gap": cut, "delta": delta}
    return ExperimentResult("riemann-sum", table, summary, assertions)


def _torus_inputs(cfg: ExperimentConfig):
    X = geo.torus_grid(int(cfg.get("grid", 5)), 8)
    ts = time_grid(cfg, 11)
    return X, ts


ROW_HEADER = ["k", "sup_metric_gap", "ham_gap", "conf_gap", "c0_flow_gap"]


def run_geodesic_rigidity(cfg: ExperimentConfig) -> ExperimentResult:
    """Geodesic flows of (1 + b/k) I against the flat limit."""
    ks = [int(k) for k in cfg.get("k_list", (2, 4, 8, 16, 32))]
    X, ts = _torus_inputs(cfg)
    rows = geo.rigidity_experiment(geo.bump_sequence(), ks, ts, X, build_integrator(cfg), mapper=ordered_map)
    c0 = [r["c0_flow_gap"] for r in rows]
    assertions = [strictly_decreasing("ham_gap", [r["ham_gap"] for r in rows]),
                  strictly_decreasing("c0_flow_gap", c0)]
    if max(ks) >= 16 * min(ks):
        assertions.append(below(f"c0_flow_gap(k={ks[-1]}) vs c0_flow_gap(k={ks[0]})/8", c0[-1], c0[0] / 8))
    summary = {"sequence": "(1 + b/k) I", "grid_points": len(X), "times": ts, "rows": rows}
    return ExperimentResult("geodesic-rigidity", records_csv(ROW_HEADER, rows), summary, assertions)


def run_geodesic_counterexample(cfg: ExperimentConfig) -> ExperimentResult:
    """The C^0-small, C^1-large family (1 + sin(2 pi k^2 q1)/k) I."""
    ks = [int(k) for k in cfg.get("k_list", tuple(range(2, 9)))]
    X, ts = _torus_inputs(cfg)
    rows = geo.counterexample_experiment(ks, ts, X, build_integrator(cfg), mapper=ordered_map)
    fraction = float(cfg.get("fraction", 0.9))
    delta = geo.counterexample_floor(rows, fraction)
    gap_err = max(abs(r["sup_metric_gap"] - 1.0 / r["k"]) for r in rows)
    assertions = [below("sup_metric_gap - 1/k", gap_err, 1e-12), above("reported floor delta", delta, 0.0),
                  above("min c0_flow_gap over k vs delta", min(r["c0_flow_gap"] for r in rows), delta)]
    summary = {"family": "(1 + sin(2 pi k^2 q1)/k) I", "grid_points": len(X), "times": ts, "delta": delta,
               "fraction": fraction, "rows": rows}
    return ExperimentResult("geodesic-counterexample", records_csv(ROW_HEADER, rows), summary, assertions)


def run_symplectize(cfg: ExperimentConfig) -> ExperimentResult:
    """Lifted flow on the symplectization against (phi_t x, theta - h_t x)."""
    chart = build_chart(cfg)
    H = build_hamiltonian(cfg)
    _check_dim(chart, H)
    ic = build_integrator(cfg)
    rng = np.random.default_rng(cfg.seed)
    n = int(cfg.get("samples", 25))
    margin = float(cfg.get("margin", 0.5 if chart.window < np.inf else 0.0))
    X = chart.random_points(rng, n, margin)
    theta = rng.uniform(-1.0, 1.0, n)
    Z = np.concatenate([X, theta[:, None]], axis=1)
    times = sorted(float(t) for t in cfg.get("times", (0.5, 1.0)))
    sys = generate_system(chart, H, ic)
    disc = lift_discrepancy(sys, Z, times, ic)
    rows = [(t, i, disc[j, i]) for j, t in enumerate(times) for i in range(n)]
    table = csv_text(["t", "sample", "discrepancy"], rows)
    worst = float(disc.max(initial=0.0))
    summary = {"test": H.name, "samples": n, "times": times, "max_discrepancy": worst, "step": ic.step,
               "symplectization_sign": SYMPLECTIC_SIGN}
    return ExperimentResult("symplectize", table, summary, [below("lift discrepancy", worst, 1e-5)])


def run_norms(cfg: ExperimentConfig) -> ExperimentResult:
    """Per-time oscillation and mean of H, the contact norm and basic metric facts."""
    chart = build_chart(cfg)
    H = build_hamiltonian(cfg)
    _check_dim(chart, H)
    X = spatial_grid(chart, int(cfg.get("grid", 5)), float(cfg.get("margin", 0.0)), H)
    ts = time_grid(cfg, 11)
    nu = np.abs(volume_density_coefficient(chart, X))
    rows = []
    for t in ts:
        v = np.asarray(H(t, X), dtype=float)
        rows.append((t, v.max(), v.min(), float((v * nu).sum() / nu.sum())))
    table = csv_text(["t", "max", "min", "mean"], rows)
    norm = contact_norm(H, ts, X, chart)
    double = contact_norm(lambda t, Y: 2.0 * H(t, Y), ts, X, chart)
    sup = uniform_norm(H, ts, X)
    hofer = hofer_length(H, ts, X)
    zero = contact_norm(lambda t, Y: H(t, Y) - H(t, Y), ts, X, chart)
    assertions = [Assertion("contact norm is nonnegative", norm >= 0.0, norm, 0.0, ">="),
                  below("homogeneity |2H| - 2|H|", abs(double - 2 * norm), 1e-12 * max(1.0, norm)),
                  Assertion("contact norm <= 3 sup|H|", norm <= 3 * sup + 1e-12, norm, 3 * sup, "<="),
                  Assertion("norm of H - H is zero", zero == 0.0, zero, 0.0, "==")]
    summary = {"hamiltonian": H.name, "grid_points": len(X), "contact_norm": norm, "uniform_norm": sup,
               "hofer_length": hofer}
    return ExperimentResult("norms", table, summary, assertions)


RUNNERS: dict[str, Callable[[ExperimentConfig], ExperimentResult]] = {
    "flow": run_flow,
    "verify-group": run_verify_group,
    "verify-transform": run_verify_transform,
    "mollify": run_mollify,
    "riemann-sum": run_riemann_sum,
    "geodesic-rigidity": run_geodesic_rigidity,
    "geodesic-counterexample": run_geodesic_counterexample,
    "symplectize": run_symplectize,
    "norms": run_norms,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    return RUNNERS[cfg.name](cfg)


__all__ = ["Assertion", "ExperimentResult", "RUNNERS", "run_experiment", "CONVENTIONS", "ordered_map",
           "thread_count", "build_chart", "build_hamiltonian", "build_integrator", "spatial_grid", "PRESETS"]
