"""Experiment configuration files.

A configuration is an INI file with the sections below; every key is
validated and unknown sections or keys are rejected.

    [chart]        kind = heisenberg | flat_torus, n, window
    [hamiltonian]  preset = <name>, then that preset's parameters
    [hamiltonian2] second Hamiltonian (verify-group)
    [transform]    preset = dilation | right-translation, parameters
    [metric]       preset = flat | conformal-bump | oscillatory, parameters
    [integrator]   step, scheme, fd_step
    [experiment]   name, seed and the grid / parameter keys of EXPERIMENT_KEYS
    [output]       directory, formats

Values are numbers, comma-separated tuples, ``none``, or bare words.
"""
from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .errors import ConfigError
from .presets import PRESETS

EXPERIMENTS = ("flow", "verify-group", "verify-transform", "mollify", "riemann-sum", "geodesic-rigidity",
               "geodesic-counterexample", "symplectize", "norms")

CHART_KEYS = {"kind", "n", "window"}
INTEGRATOR_KEYS = {"step", "scheme", "fd_step"}
OUTPUT_KEYS = {"directory", "formats"}
EXPERIMENT_KEYS = {
    "name", "seed", "grid", "margin", "t_nodes", "t_end", "x0", "k_list", "samples", "epsilons", "levels",
    "reference_nodes", "quad_nodes", "tau", "delta", "theta", "times", "fraction", "include_inverse",
}
PRESET_SECTIONS = {"hamiltonian": "hamiltonian", "hamiltonian2": "hamiltonian", "transform": "transform",
                   "metric": "metric"}
FORMATS = ("csv", "json")


def parse_value(text: str) -> Any:
    s = text.strip()
    if s.lower() in ("none", ""):
        return None
    if s.lower() in ("true", "yes", "on"):
        return True
    if s.lower() in ("false", "no", "off"):
        return False
    if "," in s:
        return tuple(parse_value(p) for p in s.split(",") if p.strip())
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


@dataclass
class ExperimentConfig:
    chart: dict = field(default_factory=lambda: {"kind": "heisenberg", "n": 1, "window": 2.0})
    hamiltonian: Optional[dict] = None
    hamiltonian2: Optional[dict] = None
    transform: Optional[dict] = None
    metric: Optional[dict] = None
    integrator: dict = field(default_factory=dict)
    experiment: dict = field(default_factory=dict)
    output: dict = field(default_factory=lambda: {"directory": "contactflow-output", "formats": ("csv", "json")})
    source_hash: str = ""

    @property
    def name(self) -> str:
        return self.experiment["name"]

    @property
    def seed(self) -> int:
        return int(self.experiment.get("seed", 0))

    def get(self, key: str, default=None):
        return self.experiment.get(key, default)


def _positive(section, key, value, integer=False):
    if integer and (not isinstance(value, int) or isinstance(value, bool)):
        raise ConfigError(f"[{section}] {key} must be an integer, got {value!r}")
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not value > 0:
        raise ConfigError(f"[{section}] {key} must be a positive number, got {value!r}")
    return value


def _as_tuple(v):
    return v if isinstance(v, tuple) else (v,)


def _validate_preset_section(section: str, values: dict) -> dict:
    if "preset" not in values:
        raise ConfigError(f"[{section}] needs a preset key")
    name = values["preset"]
    kind = PRESET_SECTIONS[section]
    if name not in PRESETS or PRESETS[name].kind != kind:
        known = sorted(p.name for p in PRESETS.values() if p.kind == kind)
        raise ConfigError(f"[{section}] unknown {kind} preset {name!r}; known: {known}")
    params = {k: v for k, v in values.items() if k != "preset"}
    unknown = set(params) - set(PRESETS[name].defaults)
    if unknown:
        raise ConfigError(f"[{section}] preset {name!r} has no parameter(s) {sorted(unknown)}")
    return {"preset": name, "params": params}


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    ch = cfg.chart
    if ch.get("kind") not in ("heisenberg", "flat_torus"):
        raise ConfigError(f"[chart] kind must be heisenberg or flat_torus, got {ch.get('kind')!r}")
    if ch["kind"] == "heisenberg":
        n = ch.get("n", 1)
        if n not in (1, 2) if isinstance(n, int) else True:
            raise ConfigError(f"[chart] n must be 1 or 2, got {n!r}")
        _positive("chart", "window", ch.get("window", 2.0))
    integ = cfg.integrator
    for key in ("step", "fd_step"):
        if key in integ:
            _positive("integrator", key, integ[key])
    if integ.get("scheme", "rk4") not in ("rk4", "euler"):
        raise ConfigError(f"[integrator] scheme must be rk4 or euler, got {integ.get('scheme')!r}")
    ex = cfg.experiment
    if ex.get("name") not in EXPERIMENTS:
        raise ConfigError(f"[experiment] name must be one of {EXPERIMENTS}, got {ex.get('name')!r}")
    seed = ex.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError(f"[experiment] seed must be a nonnegative integer, got {seed!r}")
    for key in ("grid", "t_nodes", "samples", "reference_nodes", "quad_nodes"):
        if key in ex:
            _positive("experiment", key, ex[key], integer=True)
    for key in ("t_end", "delta", "fraction"):
        if key in ex:
            _positive("experiment", key, ex[key])
    if "margin" in ex and not (isinstance(ex["margin"], (int, float)) and ex["margin"] >= 0):
        raise ConfigError(f"[experiment] margin must be nonnegative, got {ex['margin']!r}")
    for key in ("k_list", "levels"):
        if key in ex:
            vals = _as_tuple(ex[key])
            for v in vals:
                _positive("experiment", key, v, integer=True)
            ex[key] = vals
    for key in ("epsilons", "times"):
        if key in ex:
            vals = _as_tuple(ex[key])
            for v in vals:
                _positive("experiment", key, v)
            ex[key] = vals
    out = cfg.output
    fmts = _as_tuple(out.get("formats", FORMATS))
    bad = [f for f in fmts if f not in FORMATS]
    if bad:
        raise ConfigError(f"[output] unknown format(s) {bad}; expected a subset of {FORMATS}")
    out["formats"] = fmts
    out.setdefault("directory", "contactflow-output")
    needs = {"flow": ("hamiltonian",), "verify-group": ("hamiltonian", "hamiltonian2"),
             "verify-transform": ("hamiltonian", "transform"), "symplectize": ("hamiltonian",),
             "norms": ("hamiltonian",)}
    for section in needs.get(ex["name"], ()):
        if getattr(cfg, section) is None:
            raise ConfigError(f"experiment {ex['name']!r} needs a [{section}] section")
    return cfg


def parse_config_text(text: str, source_hash: str = "") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from exc
    cfg = ExperimentConfig(source_hash=source_hash or hashlib.sha256(text.encode()).hexdigest())
    allowed = {"chart": CHART_KEYS, "integrator": INTEGRATOR_KEYS, "experiment": EXPERIMENT_KEYS,
               "output": OUTPUT_KEYS}
    for section in parser.sections():
        values = {k: parse_value(v) for k, v in parser.items(section)}
        if section in PRESET_SECTIONS:
            setattr(cfg, section, _validate_preset_section(section, values))
            continue
        if section not in allowed:
            raise ConfigError(f"unknown section [{section}]")
        unknown = set(values) - allowed[section]
        if unknown:
            raise ConfigError(f"[{section}] unknown key(s) {sorted(unknown)}")
        if section == "chart":
            merged = {"kind": "heisenberg", "n": 1, "window": 2.0}
            merged.update(values)
            cfg.chart = merged
        elif section == "output":
            cfg.output.update(values)
        else:
            setattr(cfg, section, values)
    if "name" not in cfg.experiment:
        raise ConfigError("[experiment] name is required")
    return validate(cfg)


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {p}: {exc}") from exc
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ConfigError(f"configuration {p} is not UTF-8") from exc
    return parse_config_text(text, hashlib.sha256(raw).hexdigest())
