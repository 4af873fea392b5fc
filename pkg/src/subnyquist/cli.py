"""Command-line entry point: ``subnyquist run`` and ``subnyquist validate``.

A config file is a JSON document::

    {"experiment": "channel-sweep",
     "params": {"trials": 20, "q_values": [18, 25]},
     "mwc": {"M_prime": 20}}

Every section other than ``experiment`` is merged into the experiment's
parameters (sections exist only to group them).  Overrides on the command
line use the same dotted form, e.g. ``mwc.q_prime=25`` or ``trials=5``;
values are parsed as JSON when possible.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import shutil
import sys
import tempfile
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .exceptions import InvalidParameter
from .experiments import EXPERIMENTS, SWEEPS, config_dict
from .io import (RunManifest, write_channels_csv, write_matrix, write_signal_csv,
                 write_summary_csv, write_trials_csv)

log = logging.getLogger("subnyquist")

EXIT_OK, EXIT_USAGE, EXIT_INVALID = 0, 2, 3

# desk-scale trial counts used by --reduced
REDUCED_TRIALS = {"channel-sweep": 20, "windowing": 10, "basis-mismatch": 50}

# alternative spellings accepted in configs and overrides
ALIASES = {"w_prime": "W_prime", "l_prime": "L_prime", "m_prime": "M_prime",
           "t_obs": "T_obs", "duration": "durations", "delta": "deltas"}
SWEEP_ALIASES = {"q_prime": "q_values"}


class UsageError(Exception):
    pass


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _tupled(v):
    if isinstance(v, list):
        return tuple(_tupled(x) for x in v)
    return v


def _field_name(cls, key: str) -> str:
    names = {f.name for f in dataclasses.fields(cls)}
    key = key.split(".")[-1]
    if key in names:
        return key
    for table in (ALIASES, SWEEP_ALIASES if "q_values" in names else {}):
        k = table.get(key.lower(), key)
        if k in names:
            return k
    lowered = {n.lower(): n for n in names}
    if key.lower() in lowered:
        return lowered[key.lower()]
    raise UsageError(f"unknown parameter {key!r} for {cls.__name__}")


def _coerce(cls, name: str, value):
    value = _tupled(value)
    default = getattr(cls(), name)
    if isinstance(default, tuple) and not isinstance(value, tuple):
        value = (value,)
    return value


def _flatten(doc: dict) -> dict:
    out = {}
    for key, val in doc.items():
        if key == "experiment":
            continue
        if isinstance(val, dict):
            for k, v in _flatten(val).items():
                out[f"{key}.{k}"] = v
        else:
            out[key] = val
    return out


def load_config_file(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file not found: {path}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError("config file must hold a JSON object")
    return doc


def build_config(experiment: str, doc: dict | None = None, overrides=(), seed=None,
                 trials=None, reduced=False):
    """Defaults, then --reduced, then the config file, then flags, then overrides."""
    if experiment not in EXPERIMENTS:
        raise UsageError(f"unknown experiment {experiment!r}; choose from "
                         + ", ".join(sorted(EXPERIMENTS)))
    cls, _ = EXPERIMENTS[experiment]
    values = {}
    if reduced and experiment in REDUCED_TRIALS:
        values["trials"] = REDUCED_TRIALS[experiment]
    pairs = list(_flatten(doc or {}).items())
    if seed is not None:
        pairs.append(("seed", seed))
    if trials is not None:
        if any(f.name == "trials" for f in dataclasses.fields(cls)):
            pairs.append(("trials", trials))
        else:
            log.warning("%s is a single run; --trials ignored", experiment)
    for item in overrides:
        if "=" not in item:
            raise UsageError(f"override must look like key=value: {item!r}")
        k, v = item.split("=", 1)
        pairs.append((k.strip(), _parse_value(v.strip())))
    for key, val in pairs:
        name = _field_name(cls, key)
        values[name] = _coerce(cls, name, val)
    try:
        return cls(**values)
    except TypeError as exc:
        raise InvalidParameter(str(exc)) from None


def _sweep_warnings(cfg) -> list[str]:
    qs = getattr(cfg, "q_values", ())
    M = getattr(cfg, "M_prime", None)
    bad = [q for q in qs if M is not None and q >= M]
    if not bad:
        return []
    return [f"q′ < M′ (sub-Nyquist) not met at q′ = {', '.join(map(str, bad))}; "
            "those points run above the Nyquist rate"]


def _write_outputs(experiment, cfg, result, tmp: Path) -> tuple[dict, dict]:
    outputs, results = {}, {}
    if experiment in SWEEPS:
        records = result
        outputs["trials"] = write_trials_csv(tmp / "trials.csv", records).name
        outputs["summary"] = write_summary_csv(tmp / "summary.csv", records).name
        results["points"] = len(records)
        return outputs, results
    rec = result["record"]
    outputs["trials"] = write_trials_csv(tmp / "trials.csv", [rec]).name
    outputs["summary"] = write_summary_csv(tmp / "summary.csv", [rec]).name
    if experiment == "block-demo":
        t = result["signal"].times
        outputs["signal"] = write_signal_csv(tmp / "signal.csv", t, result["signal"].grid).name
        outputs["reconstruction"] = write_signal_csv(tmp / "reconstruction.csv", t,
                                                     result["x_hat"]).name
        outputs["channel_overlays"] = write_channels_csv(tmp / "channel_overlays.csv",
                                                         result["g"]).name
        outputs["samples"] = write_channels_csv(tmp / "samples.csv", result["samples"]).name
        for key in ("nse", "support", "active_segments", "condition_number", "sample_rate_hz",
                    "essential_bandwidth_hz", "nyquist_rate_hz", "rate_reduction"):
            results[key] = result[key]
        results["normalized_squared_error"] = result["nse"]
    else:
        outputs["signal"] = write_signal_csv(tmp / "signal.csv", result["t"], result["x"]).name
        outputs["reconstruction"] = write_signal_csv(tmp / "reconstruction.csv", result["t"],
                                                     result["x_hat"]).name
        outputs["samples"] = write_channels_csv(tmp / "samples.csv", result["samples"]).name
        outputs["matrix"] = write_matrix(tmp / "matrix.txt", result["matrix"]).name
        results["error"] = rec.mean
        results["support_ok"] = bool(rec.success_rate == 1.0)
    return outputs, results


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _split_positionals(args):
    # argparse binds a leading key=value to the optional experiment slot
    if args.experiment and "=" in args.experiment:
        args.overrides = [args.experiment, *args.overrides]
        args.experiment = None


def cmd_run(args) -> int:
    _split_positionals(args)
    doc = load_config_file(args.config) if args.config else {}
    experiment = args.experiment or doc.get("experiment")
    if not experiment:
        raise UsageError("no experiment named on the command line or in the config")
    if args.experiment and doc.get("experiment") not in (None, args.experiment):
        raise UsageError(f"config is for {doc['experiment']!r}, not {args.experiment!r}")
    t0 = time.perf_counter()
    cfg = build_config(experiment, doc, args.overrides, args.seed, args.trials, args.reduced)
    cfg.validate()
    for w in _sweep_warnings(cfg):
        log.warning(w)
    stages = {"configure": time.perf_counter() - t0}

    out = Path(args.out or os.path.join("runs", experiment))
    created = not out.exists()
    out.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=".partial-", dir=out))
    manifest = RunManifest(experiment, config_dict(cfg), __version__, started=_now())
    try:
        _, fn = EXPERIMENTS[experiment]
        log.info("running %s", experiment)
        t1 = time.perf_counter()
        result = fn(cfg, jobs=args.jobs) if experiment in SWEEPS else fn(cfg)
        stages["run"] = time.perf_counter() - t1
        t2 = time.perf_counter()
        outputs, results = _write_outputs(experiment, cfg, result, tmp)
        stages["write"] = time.perf_counter() - t2
        manifest.outputs = {**outputs, "manifest": "manifest.json"}
        manifest.results = results
        manifest.stages = stages
        manifest.finished = _now()
        manifest.write(tmp / "manifest.json")
        for name in manifest.outputs.values():
            os.replace(tmp / name, out / name)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        if created:
            shutil.rmtree(out, ignore_errors=True)
        raise
    shutil.rmtree(tmp, ignore_errors=True)
    missing = manifest.missing_outputs(out)
    if missing:
        log.error("declared outputs missing: %s", missing)
        return 1
    print(json.dumps({"out": str(out), **manifest.to_dict()["results"]}, default=str))
    return EXIT_OK


def validate_report(experiment: str, doc=None, overrides=()) -> list[tuple[str, str]]:
    """``(status, constraint)`` lines; status is PASS, FAIL or WARN."""
    try:
        cfg = build_config(experiment, doc, overrides)
    except (UsageError, InvalidParameter) as exc:
        return [("FAIL", f"configuration parses: {exc}")]
    lines = [("PASS" if ok else "FAIL", name) for name, ok in cfg.checks()]
    lines += [("WARN", w) for w in _sweep_warnings(cfg)]
    return lines


def cmd_validate(args) -> int:
    _split_positionals(args)
    doc = None
    if args.config:
        try:
            doc = load_config_file(args.config)
        except UsageError as exc:
            print(f"FAIL config readable: {exc}")
            return EXIT_OK
    if args.experiment:
        names = [args.experiment]
    elif doc and doc.get("experiment"):
        names = [doc["experiment"]]
    else:
        names = list(EXPERIMENTS)
    for name in names:
        if name not in EXPERIMENTS:
            print(f"FAIL {name}: experiment id recognized")
            continue
        for status, text in validate_report(name, doc, args.overrides):
            print(f"{status} {name}: {text}")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="subnyquist",
                                description="Seeded sub-Nyquist sampling experiments.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment and write CSV/JSON outputs")
    r.add_argument("experiment", nargs="?", help="one of: " + ", ".join(EXPERIMENTS))
    r.add_argument("overrides", nargs="*", help="dotted key=value overrides")
    r.add_argument("--config", metavar="PATH")
    r.add_argument("--seed", type=int)
    r.add_argument("--trials", type=int)
    r.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    r.add_argument("--out", metavar="DIR")
    r.add_argument("--reduced", action="store_true", help="desk-scale trial counts")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("validate", help="check configuration constraints without running")
    v.add_argument("experiment", nargs="?")
    v.add_argument("overrides", nargs="*")
    v.add_argument("--config", metavar="PATH")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidParameter as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
