"""Command-line entry point.

    contactflow run <config>      run one experiment, write artifacts, exit 0/1/2
    contactflow list-presets      print the preset catalog
    contactflow selftest          run the built-in invariant suite

Exit codes: 0 all assertions pass, 1 some assertion failed, 2 invalid
configuration (or invalid CONTACTFLOW_THREADS).
"""
from __future__ import annotations

import argparse
import datetime as _dt
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .config import ExperimentConfig, load_config, parse_config_text
from .errors import ConfigError, ContactFlowError
from .experiments import CONVENTIONS, ExperimentResult, run_experiment, thread_count
from .io import json_text
from .presets import list_presets

EXIT_OK, EXIT_ASSERTION, EXIT_CONFIG = 0, 1, 2


def timestamp() -> str:
    return _dt.datetime.now(_dt.timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")


def _unique_stem(directory: Path, name: str, stamp: str) -> str:
    stem, i = f"{name}-{stamp}", 1
    while any((directory / f"{stem}.{ext}").exists() for ext in ("csv", "json")):
        stem, i = f"{name}-{stamp}-{i}", i + 1
    return stem


def write_artifacts(cfg: ExperimentConfig, result: ExperimentResult, directory: Path, stamp: str) -> dict:
    """Write ``<experiment>-<timestamp>.<ext>`` files; return the manifest entry."""
    directory.mkdir(parents=True, exist_ok=True)
    stem = _unique_stem(directory, result.name, stamp)
    files = []
    if "csv" in cfg.output["formats"]:
        (directory / f"{stem}.csv").write_bytes(result.table.encode("utf-8"))
        files.append(f"{stem}.csv")
    if "json" in cfg.output["formats"]:
        body = {"experiment": result.name, "summary": result.summary,
                "assertions": [a.as_dict() for a in result.assertions]}
        (directory / f"{stem}.json").write_text(json_text(body), encoding="utf-8")
        files.append(f"{stem}.json")
    return {
        "experiment": result.name,
        "config_hash": cfg.source_hash,
        "seed": cfg.seed,
        "timestamp": stamp,
        "files": files,
        "conventions": dict(CONVENTIONS, c0_includes_inverse=bool(cfg.get("include_inverse", True))),
        "tolerances": {a.name: a.bound for a in result.assertions},
        "assertions": [a.as_dict() for a in result.assertions],
        "passed": result.passed,
    }


def write_manifest(directory: Path, entries: list, passed: bool):
    body = {"version": __version__, "threads": thread_count(), "passed": passed, "runs": entries}
    (directory / "manifest.json").write_text(json_text(body), encoding="utf-8")


def _report(result: ExperimentResult, out):
    for a in result.assertions:
        print(f"  {a.report()}", file=out)
    print(f"{result.name}: {'PASS' if result.passed else 'FAIL'}", file=out)


def run(config_path, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    try:
        cfg = load_config(config_path)
        thread_count()
        result = run_experiment(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=err)
        return EXIT_CONFIG
    directory = Path(cfg.output["directory"])
    entry = write_artifacts(cfg, result, directory, timestamp())
    write_manifest(directory, [entry], result.passed)
    _report(result, out)
    return EXIT_OK if result.passed else EXIT_ASSERTION


# Small, fast instances of every experiment; each runs in seconds.
SELFTEST_CONFIGS = {
    "flow": """
[chart]
kind = heisenberg
n = 1
window = 2
[hamiltonian]
preset = bump
center = 0, 0, 0
radius = 1.2
height = 0.5
z_offset = 0.3
[experiment]
name = flow
x0 = 0.2, -0.1, 0.1
t_end = 1
""",
    "verify-group": """
[chart]
kind = heisenberg
[hamiltonian]
preset = bump
radius = 1.2
height = 0.2
z_offset = 0.2
profile = polynomial
[hamiltonian2]
preset = bump
center = 0.3, 0, 0
radius = 1
height = 0.2
time_rate = 1
profile = polynomial
[integrator]
step = 0.05
[experiment]
name = verify-group
grid = 3
t_nodes = 2
""",
    "verify-transform": """
[chart]
kind = heisenberg
[hamiltonian]
preset = bump
radius = 0.8
z_offset = 0.2
[transform]
preset = dilation
lam = 2
[experiment]
name = verify-transform
grid = 3
""",
    "mollify": """
[chart]
kind = heisenberg
window = 2
[experiment]
name = mollify
grid = 5
epsilons = 0.2, 0.1, 0.05
""",
    "riemann-sum": """
[chart]
kind = heisenberg
[integrator]
step = 0.01
[experiment]
name = riemann-sum
grid = 3
levels = 2, 4, 8, 16
reference_nodes = 48
samples = 10
""",
    "geodesic-rigidity": """
[chart]
kind = flat_torus
[integrator]
step = 0.01
[experiment]
name = geodesic-rigidity
k_list = 2, 4, 8
grid = 3
t_nodes = 3
""",
    "geodesic-counterexample": """
[chart]
kind = flat_torus
[integrator]
step = 0.005
[experiment]
name = geodesic-counterexample
k_list = 2, 3, 4
grid = 3
t_nodes = 3
""",
    "symplectize": """
[chart]
kind = heisenberg
[hamiltonian]
preset = bump
radius = 1.2
z_offset = 0.3
[experiment]
name = symplectize
samples = 8
times = 1
""",
    "norms": """
[chart]
kind = heisenberg
[hamiltonian]
preset = bump
radius = 1
time_rate = 1
[experiment]
name = norms
grid = 5
""",
}


def selftest_configs(seed: int = 0, directory: str = "contactflow-selftest") -> list[ExperimentConfig]:
    cfgs = []
    for text in SELFTEST_CONFIGS.values():
        full = text.replace("[experiment]", f"[experiment]\nseed = {seed}") + \
            f"\n[output]\ndirectory = {directory}\nformats = csv, json\n"
        cfgs.append(parse_config_text(full))
    return cfgs


def selftest(directory="contactflow-selftest", seed: int = 0, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    try:
        thread_count()
        cfgs = selftest_configs(seed, str(directory))
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=err)
        return EXIT_CONFIG
    directory = Path(directory)
    stamp = timestamp()
    entries, passed = [], True
    for cfg in cfgs:
        result = run_experiment(cfg)
        entries.append(write_artifacts(cfg, result, directory, stamp))
        passed &= result.passed
        _report(result, out)
    write_manifest(directory, entries, passed)
    print(f"selftest: {'PASS' if passed else 'FAIL'}", file=out)
    return EXIT_OK if passed else EXIT_ASSERTION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="contactflow", description="Contact Hamiltonian dynamics experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run the experiment described by an INI configuration")
    p_run.add_argument("config")
    sub.add_parser("list-presets", help="print the named Hamiltonians, metrics and transforms")
    p_self = sub.add_parser("selftest", help="run the built-in invariant suite")
    p_self.add_argument("--output", default="contactflow-selftest", help="artifact directory")
    p_self.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.command == "run":
            return run(args.config)
        if args.command == "list-presets":
            print("\n".join(list_presets()))
            return EXIT_OK
        if args.seed < 0:
            print("configuration error: seed must be nonnegative", file=sys.stderr)
            return EXIT_CONFIG
        return selftest(args.output, args.seed)
    except ContactFlowError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ASSERTION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
