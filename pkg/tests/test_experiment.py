import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from pbts.cli import main
from pbts.experiment import (
    ConfigError,
    build_world,
    config_from_dict,
    load_config,
    read_record,
    run_experiment,
)
from pbts.geometry import PlanarContour
from pbts.record import CSV_COLUMNS

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return p


# -- loading ------------------------------------------------------------------

def test_minimal_config_defaults(tmp_path):
    cfg = load_config(write(tmp_path, "world: sphere\nfeature: surface\n"))
    assert cfg.reference == (1.0, 0.0, -3.0, 0.0, 0.0, 0.0)
    assert cfg.gains == {"kp": [1, 1, 0.5, 0.5, 0.5, 1], "ki": [0, 0, 0.3, 0.1, 0.1, 0],
                         "bounds": [0, 0, 5, 15, 15, 0]}
    assert cfg.perception["mae"] == [0.0, 0.0, 0.1, 0.4, 0.5, 0.0]
    assert cfg.stop["max_steps"] == 400 and cfg.stop["closure_radius"] == 2.0
    assert cfg.world == {"kind": "sphere", "radius": 60.0, "center": [0.0, 0.0, 0.0]}
    assert len(cfg.runs()) == 1


def test_edge_defaults(tmp_path):
    cfg = load_config(write(tmp_path, "world: circle\n"))
    assert cfg.feature == "edge"
    assert cfg.reference == (0.0, 1.0, -3.0, 0.0, 0.0, 0.0)
    assert cfg.perception["mae"] == [0.3, 0.0, 0.2, 1.2, 2.4, 4.1]


def test_out_of_range_reference_rejected(tmp_path):
    with pytest.raises(ConfigError, match=r"reference\.z"):
        load_config(write(tmp_path, "world: sphere\nreference: {pose: [1, 0, -8, 0, 0, 0]}\n"))
    with pytest.raises(ConfigError, match="gamma"):
        load_config(write(tmp_path, "world: circle\nreference: {pose: [0, 1, -3, 0, 0, 50]}\n"))
    with pytest.raises(ConfigError, match="sweep value -6"):
        load_config(write(tmp_path, "world: sphere\nsweep: {component: z, values: [-3, -6]}\n"))


def test_parse_error_has_line_info(tmp_path):
    with pytest.raises(ConfigError, match=r"cfg\.yaml:2:\d+: parse error"):
        load_config(write(tmp_path, "world: sphere\nreference: {pose: [1, 0]]}\n"))


@pytest.mark.parametrize("text,field", [
    ("world: sphere\ncolour: red\n", "colour"),
    ("world: sphere\ngains: {kd: [0,0,0,0,0,0]}\n", "gains.kd"),
    ("world: sphere\ngains: {kp: [1, 2]}\n", "gains.kp"),
    ("world: {kind: cube}\n", "world.kind"),
    ("world: sphere\nfeature: edge\n", "feature"),
    ("world: sphere\nsweep: {component: q, values: [1]}\n", "sweep.component"),
    ("world: sphere\nperception: {mae: {w: 1}}\n", "perception.mae.w"),
    ("world: sphere\nstop: {max_steps: 0}\n", "stop.max_steps"),
    ("world: sphere\nreference: {step: 3}\n", "exploration step"),
])
def test_validation_names_field(tmp_path, text, field):
    with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
        load_config(write(tmp_path, text))


def test_sweep_expansion(tmp_path):
    cfg = load_config(write(tmp_path, "world: sphere\nsweep: {component: z, values: [-5, -4, -3, -2, -1]}\n"))
    runs = cfg.runs()
    assert len(runs) == 5
    assert [r.reference[2] for r in runs] == [-5, -4, -3, -2, -1]
    assert all(r.reference[:2] == (1.0, 0.0) for r in runs)
    cfg = load_config(CONFIGS / "sphere_phi_sweep.yaml")
    refs = np.array([r.reference for r in cfg.runs()])
    assert len(refs) == 8
    np.testing.assert_allclose(np.hypot(refs[:, 0], refs[:, 1]), 1.0)
    np.testing.assert_allclose(refs[1, :2], (np.sqrt(0.5), np.sqrt(0.5)))
    cfg = config_from_dict({"world": "circle", "sweep": {"component": "x",
                                                         "values": {"start": -3, "stop": 2, "num": 6}}})
    assert [r.reference[0] for r in cfg.runs()] == [-3, -2, -1, 0, 1, 2]


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.yaml")), ids=lambda p: p.stem)
def test_shipped_configs_validate(path):
    cfg = load_config(path)
    assert cfg.runs()
    assert main(["validate", str(path)]) == 0


def test_world_builders():
    w = build_world({"kind": "polar", "table": {"theta_deg": [0, 90, 180, 270], "r": [40, 45, 40, 35]}})
    assert isinstance(w, PlanarContour)
    cfg = config_from_dict({"world": {"kind": "polar", "fourier": {"a0": 30, "a": [0, 0, 5]}}})
    assert cfg.world["fourier"]["a0"] == 30 and "preset" not in cfg.world
    with pytest.raises(ConfigError, match="preset"):
        build_world({"kind": "polar", "preset": "star"})


def test_config_round_trip(tmp_path):
    for path in sorted(CONFIGS.glob("*.yaml")):
        cfg = load_config(path)
        back = config_from_dict(json.loads(json.dumps(cfg.to_dict())), str(path))
        assert back == cfg


# -- running ------------------------------------------------------------------

SWEEP = """
world: sphere
reference: {pose: [1, 0, -3, 0, 0, 0]}
sweep: {component: phi, values: [0, 90, 180, 270]}
perception: {seed: 7}
stop: {max_steps: 30}
"""


def test_run_writes_artifacts(tmp_path):
    cfg = load_config(write(tmp_path, SWEEP))
    res = run_experiment(cfg, tmp_path / "out")
    assert res.ok
    files = sorted(p.name for p in (tmp_path / "out").iterdir())
    assert files == ["run_000.csv", "run_001.csv", "run_002.csv", "run_003.csv", "summary.json"]
    header = (tmp_path / "out" / "run_000.csv").read_text().splitlines()[0].split(",")
    assert tuple(header) == CSV_COLUMNS
    assert header[:8] == ["step", "bx", "by", "bz", "balpha", "bbeta", "bgamma", "fx"]
    assert header[-1] == "igamma" and len(header) == 43
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert set(summary) == {"config", "runs", "fits"}
    run = summary["runs"][0]
    assert {"id", "stop_reason", "closure_mm", "deviations"} <= set(run)
    assert set(run["deviations"]) == {"z", "alpha", "beta"}
    assert set(run["deviations"]["z"]) == {"mean", "sd", "max"}
    rec = read_record(tmp_path / "out" / "run_000.csv")
    assert len(rec) == 31


def test_csv_floats_have_nine_significant_digits(tmp_path):
    cfg = load_config(write(tmp_path, SWEEP))
    run_experiment(cfg, tmp_path / "out")
    row = (tmp_path / "out" / "run_001.csv").read_text().splitlines()[5].split(",")
    digits = [len(v.lstrip("-").replace(".", "").split("e")[0].lstrip("0")) for v in row[1:]]
    assert max(digits) <= 9


def test_summary_reloads_as_config(tmp_path):
    cfg = load_config(write(tmp_path, SWEEP))
    run_experiment(cfg, tmp_path / "out")
    again = load_config(tmp_path / "out" / "summary.json")
    assert again == cfg


def test_replay_byte_identical_serial_and_parallel(tmp_path):
    cfg = load_config(write(tmp_path, SWEEP))
    run_experiment(cfg, tmp_path / "a", jobs=1)
    run_experiment(cfg, tmp_path / "b", jobs=1)
    run_experiment(cfg, tmp_path / "c", jobs=4)
    for name in ["run_000.csv", "run_001.csv", "run_002.csv", "run_003.csv", "summary.json"]:
        a = (tmp_path / "a" / name).read_bytes()
        assert a == (tmp_path / "b" / name).read_bytes()
        assert a == (tmp_path / "c" / name).read_bytes()
    # streams differ across runs and seeds
    assert (tmp_path / "a" / "run_000.csv").read_bytes() != (tmp_path / "a" / "run_002.csv").read_bytes()
    run_experiment(cfg, tmp_path / "d", seed=8)
    assert (tmp_path / "a" / "run_000.csv").read_bytes() != (tmp_path / "d" / "run_000.csv").read_bytes()


def test_sweep_fit_in_summary(tmp_path):
    text = "world: circle\nreference: {pose: [0, 1, -3, 0, 0, 0]}\n" \
           "sweep: {component: x, values: [-3, -2, -1, 0, 1, 2]}\nstop: {max_steps: 60}\n"
    res = run_experiment(load_config(write(tmp_path, text)), tmp_path / "out", noiseless=True)
    (fit,) = res.summary["fits"]
    assert fit["component"] == "x"
    assert fit["slope"] == pytest.approx(1.0, abs=0.01) and fit["r2"] >= 0.99


def test_failed_run_sets_exit_status(tmp_path):
    # a tiny contact band ends every run in contact loss, and the artifacts are kept
    cfg = write(tmp_path, "world: sphere\nstop: {contact_band: [3.5, 8]}\n")
    assert main(["run", str(cfg), "--out", str(tmp_path / "out")]) == 1
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["runs"][0]["stop_reason"] == "contact_loss"
    assert (tmp_path / "out" / "run_000.csv").exists()


def test_cli_run_and_errors(tmp_path, capsys):
    cfg = write(tmp_path, SWEEP)
    assert main(["run", str(cfg), "--out", str(tmp_path / "o"), "--jobs", "2", "--noiseless"]) == 0
    out = capsys.readouterr().out
    assert "run   0: max_steps" in out and "wrote 4 trajectories" in out
    assert main(["run", str(write(tmp_path, "world: sphere\nreference: {pose: [1,0,-8,0,0,0]}\n", "bad.yaml"))]) == 2
    assert main(["validate", str(tmp_path / "missing.yaml")]) == 2


def test_validate_flags_bad_initial_pose(tmp_path):
    cfg = write(tmp_path, "world: sphere\ninitial_pose: [0, 0, 70, 0, 0, 0]\n")
    assert main(["validate", str(cfg)]) == 1


def test_module_entry_point(tmp_path):
    env = dict(os.environ, PBTS_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-m", "pbts", "validate", str(CONFIGS / "disk_edge.yaml")],
                         capture_output=True, text=True, env=env)
    assert out.returncode == 0, out.stderr
    assert "ok" in out.stdout
