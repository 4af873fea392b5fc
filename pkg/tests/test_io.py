import csv
import json

import numpy as np

from subnyquist.experiments import ExperimentRecord, TrialResult
from subnyquist.io import (RunManifest, config_hash, read_matrix, read_summary_csv,
                           write_channels_csv, write_matrix, write_signal_csv, write_spectrum_csv,
                           write_summary_csv, write_trials_csv)


def records(grouped=False):
    out = []
    for v in (6.0, 25.0):
        ts = tuple(TrialResult(v, t, (1, t), 0.1 * t + v, t % 2 == 0, 20.0 if grouped else None)
                   for t in range(3))
        out.append(ExperimentRecord(v, 1.0, 0.5, 1.0, 1.5, 2 / 3, ts, 20.0 if grouped else None))
    return out


def test_matrix_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    A = rng.standard_normal((5, 7)) + 1j * rng.standard_normal((5, 7))
    np.testing.assert_array_equal(read_matrix(write_matrix(tmp_path / "A.txt", A)), A)
    assert (tmp_path / "A.txt").read_text().splitlines()[0] == "5 7"


def test_empty_matrix(tmp_path):
    assert read_matrix(write_matrix(tmp_path / "A.txt", np.zeros((0, 3)))).shape == (0, 3)


def test_summary_round_trip(tmp_path):
    rows = read_summary_csv(write_summary_csv(tmp_path / "s.csv", records()))
    assert [r["sweep_value"] for r in rows] == [6.0, 25.0]
    assert rows[0]["success_rate"] == 2 / 3 and rows[1]["p90"] == 1.5


def test_grouped_columns(tmp_path):
    rows = read_summary_csv(write_summary_csv(tmp_path / "s.csv", records(True)))
    assert rows[0]["group"] == 20.0
    with (write_trials_csv(tmp_path / "t.csv", records(True))).open() as fh:
        r = list(csv.DictReader(fh))
    assert list(r[0]) == ["group", "sweep_value", "trial", "seed", "error", "support_ok"]
    assert r[1]["seed"] == "1-1" and r[1]["support_ok"] == "0"


def test_trials_csv(tmp_path):
    with write_trials_csv(tmp_path / "t.csv", records()).open() as fh:
        r = list(csv.DictReader(fh))
    assert len(r) == 6 and float(r[4]["error"]) == 25.1


def test_signal_tables(tmp_path):
    t = np.linspace(0, 1, 5)
    x = np.exp(1j * t)
    with write_signal_csv(tmp_path / "x.csv", t, x).open() as fh:
        r = list(csv.DictReader(fh))
    assert float(r[2]["im"]) == np.imag(x[2])
    with write_spectrum_csv(tmp_path / "X.csv", t, x).open() as fh:
        assert fh.readline().strip() == "omega_rad_s,re,im"
    with write_channels_csv(tmp_path / "y.csv", np.ones((2, 3))).open() as fh:
        assert len(fh.readlines()) == 7


def test_manifest(tmp_path):
    m = RunManifest("block-demo", {"q": 8}, "0.1.0", outputs={"summary": "summary.csv"},
                    stages={"run": 0.5}, results={"nse": 0.04})
    assert m.missing_outputs(tmp_path) == ["summary.csv"]
    (tmp_path / "summary.csv").write_text("")
    assert m.missing_outputs(tmp_path) == []
    d = json.loads(m.write(tmp_path / "manifest.json").read_text())
    assert d["config_hash"] == m.config_hash and d["stage_seconds"] == {"run": 0.5}


def test_config_hash_is_canonical():
    assert config_hash({"a": 1, "b": (1, 2)}) == config_hash({"b": [1, 2], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})
    assert config_hash({"a": np.int64(3)}) == config_hash({"a": 3})
