import json
import subprocess
import sys

import pytest

from contactflow import __version__
from contactflow.cli import EXIT_ASSERTION, EXIT_CONFIG, EXIT_OK, SELFTEST_CONFIGS, main, selftest_configs
from contactflow.config import EXPERIMENTS

REEB = """
[chart]
kind = heisenberg
[hamiltonian]
preset = reeb
[integrator]
step = 0.01
[experiment]
name = flow
seed = 4
x0 = 0, 0, -0.5
[output]
directory = {out}
"""


def write(tmp_path, text, name="cfg.ini"):
    p = tmp_path / name
    p.write_text(text.format(out=tmp_path / "out"))
    return p


def artifacts(directory, ext):
    return sorted(p for p in directory.iterdir() if p.suffix == f".{ext}" and p.name != "manifest.json")


def test_run_writes_artifacts_and_manifest(tmp_path, capsys):
    assert main(["run", str(write(tmp_path, REEB))]) == EXIT_OK
    out = tmp_path / "out"
    csvs, jsons = artifacts(out, "csv"), artifacts(out, "json")
    assert len(csvs) == len(jsons) == 1 and csvs[0].name.startswith("flow-")
    lines = csvs[0].read_bytes().decode().split("\r\n")
    assert lines[0] == "t,x1,x2,x3,h"
    z = [float(line.split(",")[3]) for line in lines[1:] if line]
    assert z[0] == -0.5 and abs(z[-1] - 0.5) < 1e-12
    manifest = json.loads((out / "manifest.json").read_text())
    run = manifest["runs"][0]
    assert manifest["version"] == __version__ and manifest["passed"] is True
    assert run["seed"] == 4 and len(run["config_hash"]) == 64
    assert run["conventions"]["symplectization_sign"] == 1
    assert run["conventions"]["c0_includes_inverse"] is True
    assert run["tolerances"] and all(a["passed"] for a in run["assertions"])
    report = json.loads(jsons[0].read_text())
    assert report["experiment"] == "flow"
    assert "flow: PASS" in capsys.readouterr().out


def test_runs_do_not_overwrite(tmp_path):
    cfg = write(tmp_path, REEB)
    assert main(["run", str(cfg)]) == EXIT_OK
    assert main(["run", str(cfg)]) == EXIT_OK
    csvs = artifacts(tmp_path / "out", "csv")
    assert len(csvs) == 2
    assert csvs[0].read_bytes() == csvs[1].read_bytes()


def test_verify_group_constants(tmp_path):
    text = """
[chart]
window = 4
[hamiltonian]
preset = reeb
[hamiltonian2]
preset = reeb
[integrator]
step = 0.05
[experiment]
name = verify-group
grid = 2
margin = 2.5
t_nodes = 3
[output]
directory = {out}
formats = json
"""
    assert main(["run", str(write(tmp_path, text))]) == EXIT_OK
    report = json.loads(artifacts(tmp_path / "out", "json")[0].read_text())
    c0 = [r["value"] for r in report["summary"]["records"] if r["term"] == "c0"]
    assert len(c0) == 2 and max(c0) < 1e-6
    assert not artifacts(tmp_path / "out", "csv")


def test_assertion_failure_exits_one(tmp_path, capsys):
    text = """
[chart]
kind = flat_torus
[integrator]
step = 0.05
[experiment]
name = geodesic-rigidity
k_list = 4, 2
grid = 2
t_nodes = 2
[output]
directory = {out}
"""
    assert main(["run", str(write(tmp_path, text))]) == EXIT_ASSERTION
    assert "FAIL" in capsys.readouterr().out
    assert json.loads((tmp_path / "out" / "manifest.json").read_text())["passed"] is False


@pytest.mark.parametrize("text", [
    REEB.replace("step = 0.01", "step = 0.01\nbogus = 1"),
    REEB.replace("preset = reeb", "preset = warp"),
    REEB.replace("seed = 4", "seed = -4"),
    "not an ini file",
])
def test_invalid_config_exits_two(tmp_path, text, capsys):
    assert main(["run", str(write(tmp_path, text))]) == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


def test_missing_config_exits_two(tmp_path):
    assert main(["run", str(tmp_path / "absent.ini")]) == EXIT_CONFIG


def test_invalid_thread_env_exits_two(tmp_path, monkeypatch):
    monkeypatch.setenv("CONTACTFLOW_THREADS", "-2")
    assert main(["run", str(write(tmp_path, REEB))]) == EXIT_CONFIG
    assert main(["selftest", "--output", str(tmp_path / "st")]) == EXIT_CONFIG


def test_usage_errors(capsys):
    assert main([]) == EXIT_CONFIG
    assert main(["frobnicate"]) == EXIT_CONFIG
    assert main(["selftest", "--seed", "-1"]) == EXIT_CONFIG
    assert main(["--version"]) == EXIT_OK
    assert __version__ in capsys.readouterr().out


def test_list_presets(capsys):
    assert main(["list-presets"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "constant -1" in out
    for name in ("reeb", "coordinate-x", "translation", "bump", "flat", "conformal-bump", "oscillatory",
                 "dilation", "right-translation"):
        assert f"  {name}(" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "contactflow", "list-presets"], capture_output=True, text=True)
    assert proc.returncode == 0 and "[hamiltonians]" in proc.stdout


def test_selftest_covers_every_experiment(tmp_path):
    cfgs = selftest_configs(seed=7, directory=str(tmp_path))
    assert sorted(c.name for c in cfgs) == sorted(EXPERIMENTS) == sorted(SELFTEST_CONFIGS)
    assert all(c.seed == 7 and c.output["directory"] == str(tmp_path) for c in cfgs)
