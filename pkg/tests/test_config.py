from pathlib import Path

import pytest

from contactflow.config import EXPERIMENTS, load_config, parse_config_text, parse_value
from contactflow.errors import ConfigError

BASE = """
[chart]
kind = heisenberg
[hamiltonian]
preset = bump
radius = 1.2
[experiment]
name = flow
"""


@pytest.mark.parametrize("text, value", [("1", 1), ("2.5", 2.5), ("none", None), ("true", True), ("off", False),
                                         ("1, 2,3", (1, 2, 3)), ("0.1,x", (0.1, "x")), ("rk4", "rk4")])
def test_parse_value(text, value):
    assert parse_value(text) == value


def test_minimal_config():
    cfg = parse_config_text(BASE)
    assert cfg.name == "flow" and cfg.seed == 0
    assert cfg.chart == {"kind": "heisenberg", "n": 1, "window": 2.0}
    assert cfg.hamiltonian == {"preset": "bump", "params": {"radius": 1.2}}
    assert cfg.output["formats"] == ("csv", "json")
    assert len(cfg.source_hash) == 64


def test_load_config_hashes_bytes(tmp_path):
    p = tmp_path / "a.ini"
    p.write_text(BASE)
    a = load_config(p)
    assert a.source_hash == parse_config_text(BASE).source_hash
    p.write_text(BASE + "seed = 3\n")
    assert load_config(p).source_hash != a.source_hash
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")


def test_single_values_become_tuples():
    cfg = parse_config_text("[experiment]\nname = geodesic-rigidity\nk_list = 4\nepsilons = 0.5\n")
    assert cfg.get("k_list") == (4,) and cfg.get("epsilons") == (0.5,)


@pytest.mark.parametrize("extra", [
    "[bogus]\nx = 1\n",
    "[integrator]\nstepsize = 0.1\n",
    "[integrator]\nstep = -1\n",
    "[integrator]\nscheme = leapfrog\n",
    "[output]\nformats = csv, png\n",
    "[metric]\npreset = dilation\n",
    "[transform]\npreset = bump\n",
    "[hamiltonian2]\nradius = 1\n",
])
def test_invalid_sections_rejected(extra):
    with pytest.raises(ConfigError):
        parse_config_text(BASE + extra)


@pytest.mark.parametrize("line", ["seed = -1", "seed = 1.5", "grid = 0", "grid = 2.5", "t_end = 0",
                                  "margin = -1", "k_list = 2, 0", "epsilons = 0.1, -0.1", "samples = x",
                                  "unknown_key = 1", "name = nothing"])
def test_invalid_experiment_values(line):
    with pytest.raises(ConfigError):
        parse_config_text(BASE + line + "\n")


@pytest.mark.parametrize("chart", ["kind = sphere", "n = 3", "window = 0"])
def test_invalid_chart(chart):
    with pytest.raises(ConfigError):
        parse_config_text(BASE.replace("kind = heisenberg", "kind = heisenberg\n" + chart)
                          if "kind" not in chart else BASE.replace("kind = heisenberg", chart))


def test_unknown_preset_parameter():
    with pytest.raises(ConfigError):
        parse_config_text(BASE.replace("radius = 1.2", "radius = 1.2\nwidth = 3"))


@pytest.mark.parametrize("name, missing", [("flow", "hamiltonian"), ("verify-group", "hamiltonian2"),
                                           ("verify-transform", "transform"), ("norms", "hamiltonian")])
def test_required_sections(name, missing):
    text = "[experiment]\nname = %s\n" % name
    if missing != "hamiltonian":
        text += "[hamiltonian]\npreset = reeb\n"
    with pytest.raises(ConfigError, match=missing):
        parse_config_text(text)


def test_missing_name_and_malformed():
    with pytest.raises(ConfigError):
        parse_config_text("[chart]\nkind = heisenberg\n")
    with pytest.raises(ConfigError):
        parse_config_text("no section header\n")


def test_every_experiment_name_is_known():
    assert len(EXPERIMENTS) == 9
    for name in ("mollify", "riemann-sum", "geodesic-rigidity", "geodesic-counterexample"):
        assert parse_config_text(f"[experiment]\nname = {name}\n").name == name


@pytest.mark.parametrize("path", sorted((Path(__file__).parents[1] / "configs").glob("*.ini")), ids=lambda p: p.stem)
def test_shipped_configs_parse(path):
    cfg = load_config(path)
    assert cfg.name in EXPERIMENTS
