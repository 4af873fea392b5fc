"""Plain-text outputs: CSV tables, matrix dumps and the run manifest."""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "config_hash",
    "write_trials_csv",
    "write_summary_csv",
    "read_summary_csv",
    "write_signal_csv",
    "write_spectrum_csv",
    "write_channels_csv",
    "write_matrix",
    "read_matrix",
    "RunManifest",
]

TRIAL_HEADER = ["sweep_value", "trial", "seed", "error", "support_ok"]
SUMMARY_HEADER = ["sweep_value", "mean", "p10", "p50", "p90", "success_rate"]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def config_hash(config: dict) -> str:
    """SHA-256 of the canonical JSON form of ``config``."""
    text = json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _seed_str(seed) -> str:
    return "-".join(str(s) for s in seed) if isinstance(seed, (tuple, list)) else str(seed)


def _rows_with_group(records):
    grouped = any(r.group is not None for r in records)
    return grouped, (["group"] if grouped else [])


def write_trials_csv(path, records) -> Path:
    """One row per trial; a leading ``group`` column is added for grouped sweeps."""
    grouped, extra = _rows_with_group(records)
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(extra + TRIAL_HEADER)
        for rec in records:
            for t in rec.trials:
                row = [repr(float(t.sweep_value)), t.trial, _seed_str(t.seed), repr(float(t.error)),
                       int(bool(t.support_ok))]
                w.writerow(([repr(float(rec.group))] if grouped else []) + row)
    return path


def write_summary_csv(path, records) -> Path:
    grouped, extra = _rows_with_group(records)
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(extra + SUMMARY_HEADER)
        for r in records:
            row = [repr(float(r.sweep_value))] + [repr(float(v)) for v in
                                           (r.mean, r.p10, r.p50, r.p90, r.success_rate)]
            w.writerow(([repr(float(r.group))] if grouped else []) + row)
    return path


def read_summary_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def _complex_table(path, header, first, values):
    values = np.asarray(values)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for a, v in zip(first, values):
            w.writerow([repr(float(a)), repr(float(np.real(v))), repr(float(np.imag(v)))])
    return Path(path)


def write_signal_csv(path, t, values) -> Path:
    """Columns ``t,re,im``."""
    return _complex_table(path, ["t", "re", "im"], t, values)


def write_spectrum_csv(path, omega, values) -> Path:
    """Columns ``omega_rad_s,re,im``."""
    return _complex_table(path, ["omega_rad_s", "re", "im"], omega, values)


def write_channels_csv(path, samples) -> Path:
    """Columns ``channel,k,re,im`` for a channels x samples array."""
    samples = np.atleast_2d(samples)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["channel", "k", "re", "im"])
        for i, row in enumerate(samples):
            for k, v in enumerate(row):
                w.writerow([i, k, repr(float(np.real(v))), repr(float(np.imag(v)))])
    return Path(path)


def write_matrix(path, A) -> Path:
    """Header ``rows cols`` then one ``re im`` pair per entry in row-major order."""
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    with Path(path).open("w") as fh:
        fh.write(f"{A.shape[0]} {A.shape[1]}\n")
        for v in A.ravel():
            fh.write(f"{float(v.real)!r} {float(v.imag)!r}\n")
    return Path(path)


def read_matrix(path) -> np.ndarray:
    with Path(path).open() as fh:
        rows, cols = (int(v) for v in fh.readline().split())
        data = np.loadtxt(fh, ndmin=2) if rows * cols else np.zeros((0, 2))
    return (data[:, 0] + 1j * data[:, 1]).reshape(rows, cols)


@dataclass
class RunManifest:
    """Provenance of one run; ``outputs`` maps a label to a file name in ``out_dir``."""

    experiment: str
    config: dict
    version: str
    started: str = ""
    finished: str = ""
    outputs: dict = field(default_factory=dict)
    stages: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)

    @property
    def config_hash(self) -> str:
        return config_hash({"experiment": self.experiment, "config": self.config})

    def to_dict(self) -> dict:
        return _jsonable({
            "experiment": self.experiment,
            "config": self.config,
            "config_hash": self.config_hash,
            "version": self.version,
            "started": self.started,
            "finished": self.finished,
            "outputs": self.outputs,
            "stage_seconds": self.stages,
            "results": self.results,
        })

    def missing_outputs(self, out_dir) -> list[str]:
        return [name for name in self.outputs.values()
                if not os.path.exists(os.path.join(out_dir, name))]

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n")
        return path
