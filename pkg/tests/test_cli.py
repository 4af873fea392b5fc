import csv
import json
import os

import pytest

from subnyquist.cli import main, validate_report
from subnyquist.experiments import ChannelSweepConfig, EXPERIMENTS


def run(*argv):
    return main(list(argv))


def listing(root):
    return sorted(os.path.relpath(os.path.join(d, f), root)
                  for d, _, fs in os.walk(root) for f in fs)


def test_unknown_experiment(tmp_path, capsys):
    assert run("run", "chirp-sweep", "--out", str(tmp_path / "o")) == 2
    assert "chirp-sweep" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_missing_config_leaves_nothing(tmp_path):
    assert run("run", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o")) == 2
    assert listing(tmp_path) == []


def test_unknown_parameter(tmp_path):
    assert run("run", "block-demo", "volume=3", "--out", str(tmp_path / "o")) == 2


def test_oversampled_single_run_is_invalid(tmp_path, capsys):
    assert run("run", "mwc-pipeline", "mwc.q_prime=25", "--out", str(tmp_path / "o")) == 3
    assert "q′ < M′" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_invalid_run_keeps_existing_dir_clean(tmp_path):
    out = tmp_path / "o"
    out.mkdir()
    assert run("run", "basis-mismatch", "N=63", "--out", str(out)) == 3
    assert listing(out) == []


def test_channel_sweep_smoke(tmp_path):
    out = tmp_path / "o"
    assert run("run", "channel-sweep", "--seed", "1", "--trials", "5", "--jobs", "1",
               "--out", str(out)) == 0
    with (out / "summary.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert [float(r["sweep_value"]) for r in rows] == [float(q) for q in ChannelSweepConfig().q_values]
    m = json.loads((out / "manifest.json").read_text())
    assert m["config"]["trials"] == 5 and m["config"]["seed"] == 1
    for name in m["outputs"].values():
        assert (out / name).exists()
    assert listing(out) == sorted(m["outputs"].values())


def test_block_demo_manifest(tmp_path, capsys):
    out = tmp_path / "o"
    assert run("run", "block-demo", "--out", str(out)) == 0
    m = json.loads((out / "manifest.json").read_text())
    assert 0 < m["results"]["normalized_squared_error"] < 0.1
    assert set(m["outputs"]) >= {"signal", "reconstruction", "channel_overlays", "samples"}
    assert len(m["config_hash"]) == 64 and m["version"]
    line = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert line["nse"] == m["results"]["nse"]


@pytest.mark.parametrize("name", ["rd-pipeline", "mwc-pipeline"])
def test_one_shot_pipelines(tmp_path, name):
    out = tmp_path / "o"
    assert run("run", name, "--out", str(out)) == 0
    assert {"signal.csv", "reconstruction.csv", "samples.csv", "matrix.txt",
            "manifest.json"} <= set(os.listdir(out))


def test_config_file_with_sections(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"experiment": "basis-mismatch",
                               "params": {"trials": 2, "deltas": [0.0]}, "rd": {"M": 16}}))
    out = tmp_path / "o"
    assert run("run", "--config", str(cfg), "K=2", "--out", str(out)) == 0
    m = json.loads((out / "manifest.json").read_text())
    assert (m["config"]["M"], m["config"]["K"], m["config"]["trials"]) == (16, 2, 2)


def test_validate_defaults_pass(capsys):
    assert run("validate") == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines and not [l for l in lines if l.startswith("FAIL")]
    for name in EXPERIMENTS:
        assert any(l.startswith(f"PASS {name}:") for l in lines)


def test_validate_names_constraints(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"experiment": "channel-sweep", "mwc": {"M_prime": 60}}))
    assert run("validate", "--config", str(cfg)) == 0
    assert "FAIL channel-sweep: M′ ≤ L′" in capsys.readouterr().out
    assert run("validate", "basis-mismatch", "N=127") == 0
    assert "FAIL basis-mismatch: N even" in capsys.readouterr().out


def test_validate_bad_inputs_still_exit_zero(tmp_path, capsys):
    assert run("validate", "--config", str(tmp_path / "none.json")) == 0
    assert run("validate", "warp-drive") == 0
    assert capsys.readouterr().out.count("FAIL") == 2


def test_validate_warns_on_oversampled_sweep_points():
    lines = validate_report("channel-sweep")
    assert [s for s, _ in lines].count("WARN") == 1
    assert all(s != "FAIL" for s, _ in lines)


@pytest.mark.parametrize("over, code", [((), 0), (("q_prime=25",), 3), (("M_prime=60",), 3)])
def test_validate_agrees_with_run(tmp_path, over, code):
    report = validate_report("mwc-pipeline", None, over)
    assert any(s == "FAIL" for s, _ in report) == (code == 3)
    assert run("run", "mwc-pipeline", *over, "--out", str(tmp_path / "o")) == code
