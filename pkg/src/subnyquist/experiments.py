"""Seeded sensitivity and robustness experiments.

Every trial is a pure function of ``(config, sweep value, trial index)``.
Random streams are keyed by ``(seed, trial, stream[, channel])`` so the
same signal and the same chip patterns are reused at every sweep point
(common random numbers), and trials can run in any order or in parallel.

Streams: 0 planted support, 1 chip patterns, 2 amplitudes, 3 signal.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import InvalidParameter
from .metrics import avg_squared_error, normalized_squared_error, summarize
from .recovery import (omp, solve_block, somp, synthesize_block, synthesize_multiband,
                       unweight_and_synthesize_multitone)
from .samplers import (BlockSamplerConfig, MwcConfig, RdConfig, block_convolve,
                       block_sample, mwc_sample, rd_sample_grid)
from .signals import (gen_block_sparse, gen_multiband, make_rng, slice_bands,
                      window_signal)
from .systems import build_block_system, build_mwc_mmv, build_rd_smv
from .weights import shift_indices

log = logging.getLogger(__name__)

__all__ = [
    "TrialResult",
    "ExperimentRecord",
    "ChannelSweepConfig",
    "WindowingConfig",
    "BlockDemoConfig",
    "BasisMismatchConfig",
    "exp_channel_sweep",
    "exp_windowing",
    "exp_block_demo",
    "exp_basis_mismatch",
    "RdPipelineConfig",
    "MwcPipelineConfig",
    "exp_rd_pipeline",
    "exp_mwc_pipeline",
    "essential_bandwidth",
    "EXPERIMENTS",
    "SWEEPS",
    "config_dict",
]

SIGNAL, CHIPS, AMPS, WAVE = 0, 1, 2, 3


@dataclass(frozen=True)
class TrialResult:
    sweep_value: float
    trial: int
    seed: tuple
    error: float
    support_ok: bool
    group: float | None = None


@dataclass(frozen=True)
class ExperimentRecord:
    """Summary of all trials at one sweep point (``group`` splits sub-curves)."""

    sweep_value: float
    mean: float
    p10: float
    p50: float
    p90: float
    success_rate: float
    trials: tuple = ()
    group: float | None = None

    @property
    def errors(self) -> np.ndarray:
        return np.array([t.error for t in self.trials])

    @property
    def seeds(self) -> list:
        return [t.seed for t in self.trials]


def _records(results: list[TrialResult]) -> list[ExperimentRecord]:
    keyed = {}
    for r in results:
        keyed.setdefault((r.group, r.sweep_value), []).append(r)
    out = []
    for (g, v), rs in sorted(keyed.items(), key=lambda kv: (kv[0][0] is not None, kv[0][0] or 0,
                                                           kv[0][1])):
        rs = sorted(rs, key=lambda r: r.trial)
        s = summarize([r.error for r in rs], [r.support_ok for r in rs])
        out.append(ExperimentRecord(v, s["mean"], s["p10"], s["p50"], s["p90"],
                                    s["success_rate"], tuple(rs), g))
    return out


def _run(fn, cfg, tasks, jobs):
    """Evaluate ``fn(cfg, *task)`` for every task, serially or in a process pool."""
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(cfg, *t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        futs = [ex.submit(fn, cfg, *t) for t in tasks]
        return [f.result() for f in futs]


def _is_whole(v, tol=1e-9) -> bool:
    return abs(v - round(v)) < tol * max(1.0, abs(v))


def _raise_failed(checks):
    bad = [name for name, ok in checks if not ok]
    if bad:
        raise InvalidParameter("violated constraint: " + "; ".join(bad))


def _edge_mask(times, T, margin):
    if margin <= 0:
        return None, T
    return (times >= margin) & (times < T - margin), T - 2 * margin


# --------------------------------------------------------------------------
# channel sweep
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ChannelSweepConfig:
    """Reconstruction error against the number of converter channels.

    ``amplitude_mode="equal"`` plants unit-peak flat-spectrum pulses, one per
    slice, sharing one centre (so the slice sequences differ only by a
    phase); ``"random"`` fills each slice with masked noise whose power is
    log-uniform over one decade.  ``edge_margin`` (default one chip period
    ``L'/W'``) is dropped at both ends before the error is measured.
    """

    T: float = 4.0
    W_prime: float = 500.0
    L_prime: int = 50
    M_prime: float = 20.0
    q_values: tuple = (6, 8, 10, 12, 14, 16, 18, 20, 22, 23, 25, 28, 30, 35, 40, 45, 50)
    omega: int = 3
    amplitude_mode: str = "equal"
    trials: int = 100
    seed: int = 1
    R: int = 16
    synthesis: str = "sinc"
    boundary: str = "periodic"
    edge_margin: float | None = None
    skip_oversampled: bool = False

    def checks(self) -> list[tuple[str, bool]]:
        qs = self.q_values
        return [
            ("trials >= 1", self.trials >= 1),
            ("q' sweep nonempty", len(qs) > 0),
            ("amplitude_mode in {equal, random}", self.amplitude_mode in ("equal", "random")),
            ("M′ ≤ L′", self.M_prime <= self.L_prime),
            ("Omega < q′ ≤ L′", bool(qs) and min(qs) > self.omega and max(qs) <= self.L_prime),
            ("Omega ≤ L′ - 1 (bands inside [-W′/2, W′/2))", 1 <= self.omega <= self.L_prime - 1),
            ("R·M′ integer (decimation ratio)", _is_whole(self.R * self.M_prime)),
        ]

    def validate(self):
        _raise_failed(self.checks())

    @property
    def margin(self) -> float:
        return self.L_prime / self.W_prime if self.edge_margin is None else self.edge_margin


def _planted_slices(seed, trial, L_prime, count):
    # slices lying wholly inside [-W'/2, W'/2); for even L' the last index straddles
    pool = shift_indices(L_prime)
    if L_prime % 2 == 0:
        pool = pool[:-1]
    return np.sort(make_rng(seed, trial, SIGNAL).choice(pool, size=count, replace=False))


def _channel_signal(cfg: ChannelSweepConfig, trial: int):
    sl = _planted_slices(cfg.seed, trial, cfg.L_prime, cfg.omega)
    bands = slice_bands(sl, cfg.L_prime, cfg.W_prime)
    if cfg.amplitude_mode == "equal":
        sig = gen_multiband(bands, None, cfg.W_prime, cfg.T, cfg.R,
                            (cfg.seed, trial, WAVE), mode="pulse")
    else:
        amps = 10 ** make_rng(cfg.seed, trial, AMPS).uniform(-1, 0, cfg.omega)
        sig = gen_multiband(bands, amps, cfg.W_prime, cfg.T, cfg.R,
                            (cfg.seed, trial, WAVE), mode="noise")
    return sig, sl


def _channel_trial(cfg: ChannelSweepConfig, q: int, trial: int) -> TrialResult:
    sig, sl = _channel_signal(cfg, trial)
    mwc = MwcConfig.random(cfg.W_prime, cfg.L_prime, cfg.M_prime, q,
                           seed=(cfg.seed, trial, CHIPS), require_sub_nyquist=False)
    Y = mwc_sample(sig, mwc, cfg.R, cfg.boundary)
    system = build_mwc_mmv(Y, mwc)
    res = somp(system.A, system.Y, cfg.omega)
    x_hat = synthesize_multiband(res, system, mwc, cfg.T, cfg.R, cfg.synthesis)
    keep, T_kept = _edge_mask(sig.times, cfg.T, cfg.margin)
    err = avg_squared_error(sig.grid, x_hat, T_kept, cfg.W_prime, sig.rate, keep)
    ok = set(system.index_map[res.support].tolist()) == set(sl.tolist())
    return TrialResult(float(q), trial, (cfg.seed, trial), err, ok)


def exp_channel_sweep(cfg: ChannelSweepConfig = ChannelSweepConfig(),
                      jobs: int | None = 1) -> list[ExperimentRecord]:
    """Per ``q'``: plant ``omega`` slices, draw chips, sample, S-OMP, re-synthesise."""
    cfg.validate()
    qs = []
    for q in cfg.q_values:
        if q >= cfg.M_prime:
            if cfg.skip_oversampled:
                log.warning("skipping q'=%d: q' >= M' (average rate above Nyquist)", q)
                continue
            log.warning("q'=%d >= M'=%g: average rate is not sub-Nyquist", q, cfg.M_prime)
        qs.append(q)
    tasks = [(q, t) for q in qs for t in range(cfg.trials)]
    return _records(_run(_channel_trial, cfg, tasks, jobs))


# --------------------------------------------------------------------------
# windowing
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class WindowingConfig:
    """Reconstruction error against the duration of a centred rectangular window.

    Four randomly placed whole-slice noise bands of unit power.  The window
    spreads the spectrum, so S-OMP runs with a relative residual tolerance
    and a row budget of ``(q'-1)//2`` (the uniqueness bound ``q' > 2 Omega``),
    or ``L'`` when the system is square.
    """

    T_obs: float = 2.0
    W_prime: float = 500.0
    L_prime: int = 50
    M_prime: float = 20.0
    q_values: tuple = (20, 50)
    durations: tuple = (2.0, 1.0, 0.5, 0.4, 0.2, 0.1)
    n_bands: int = 4
    trials: int = 50
    seed: int = 1
    R: int = 8
    residual_tol: float = 1e-3
    synthesis: str = "sinc"
    boundary: str = "periodic"
    edge_margin: float | None = None

    def checks(self) -> list[tuple[str, bool]]:
        return [
            ("trials >= 1", self.trials >= 1),
            ("duration and q' sweeps nonempty", bool(self.durations) and bool(self.q_values)),
            ("durations in (0, T_obs]", all(0 < d <= self.T_obs for d in self.durations)),
            ("M′ ≤ L′", self.M_prime <= self.L_prime),
            ("q′ ≤ L′", bool(self.q_values) and max(self.q_values) <= self.L_prime),
            ("n_bands ≤ L′ - 1 (bands inside [-W′/2, W′/2))", 1 <= self.n_bands <= self.L_prime - 1),
            ("R·M′ integer (decimation ratio)", _is_whole(self.R * self.M_prime)),
        ]

    def validate(self):
        _raise_failed(self.checks())

    @property
    def margin(self) -> float:
        return self.L_prime / self.W_prime if self.edge_margin is None else self.edge_margin

    def budget(self, q: int) -> int:
        return self.L_prime if q >= self.L_prime else max(1, (q - 1) // 2)


def _window_trial(cfg: WindowingConfig, q: int, d: float, trial: int) -> TrialResult:
    sl = _planted_slices(cfg.seed, trial, cfg.L_prime, cfg.n_bands)
    sig = gen_multiband(slice_bands(sl, cfg.L_prime, cfg.W_prime), None, cfg.W_prime,
                        cfg.T_obs, cfg.R, (cfg.seed, trial, WAVE), mode="noise")
    z = window_signal(sig, d, (cfg.T_obs - d) / 2) if d < cfg.T_obs else sig
    mwc = MwcConfig.random(cfg.W_prime, cfg.L_prime, cfg.M_prime, q,
                           seed=(cfg.seed, trial, CHIPS), require_sub_nyquist=False)
    system = build_mwc_mmv(mwc_sample(z, mwc, cfg.R, cfg.boundary), mwc)
    res = somp(system.A, system.Y, cfg.budget(q), tol=cfg.residual_tol * np.linalg.norm(system.Y))
    x_hat = synthesize_multiband(res, system, mwc, cfg.T_obs, cfg.R, cfg.synthesis)
    keep, T_kept = _edge_mask(z.times, cfg.T_obs, cfg.margin)
    err = avg_squared_error(z.grid, x_hat, T_kept, cfg.W_prime, z.rate, keep)
    ok = set(sl.tolist()) <= set(system.index_map[res.support].tolist())
    return TrialResult(float(d), trial, (cfg.seed, trial), err, ok, float(q))


def exp_windowing(cfg: WindowingConfig = WindowingConfig(),
                  jobs: int | None = 1) -> list[ExperimentRecord]:
    """Records grouped by ``q'`` (``group``) with window duration as the sweep value.

    ``support_ok`` here means every planted slice was recovered.
    """
    cfg.validate()
    tasks = [(q, d, t) for q in cfg.q_values for d in cfg.durations for t in range(cfg.trials)]
    return _records(_run(_window_trial, cfg, tasks, jobs))


# --------------------------------------------------------------------------
# block-sparse demo
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockDemoConfig:
    T: float = 1.0
    L: int = 10
    M: int = 40
    q: int = 8
    intervals: tuple = ((0.12, 0.18), (0.43, 0.49), (0.71, 0.79))
    pulse_family: str = "bumps"
    dense_rate: float = 8000.0
    seed: int = 1
    solver: str = "somp"
    energy_fraction: float = 0.9999

    def checks(self) -> list[tuple[str, bool]]:
        iv = self.intervals
        return [
            ("q < L", 1 <= self.q < self.L),
            ("M ≥ 1", self.M >= 1),
            ("D = M (Fourier basis dimension)", True),
            ("intervals inside [0, T)", all(0 <= a < b <= self.T for a, b in iv)),
            ("intervals disjoint", all(b1 <= a2 for (_, b1), (a2, _) in zip(sorted(iv), sorted(iv)[1:]))),
            ("pulse_family known", self.pulse_family in ("hann", "smooth", "bumps")),
            ("solver in {somp, support_then_lsq}", self.solver in ("somp", "support_then_lsq")),
            ("dense grid aligns with samples", _is_whole(self.dense_rate * self.T / (self.L * self.M))),
        ]

    def validate(self):
        _raise_failed(self.checks())


def essential_bandwidth(grid, rate: float, fraction: float = 0.9999) -> float:
    """Smallest ``B`` (Hz) such that ``|f| <= B`` holds ``fraction`` of the energy."""
    P = np.abs(np.fft.rfft(np.asarray(grid, dtype=float))) ** 2
    P[1:] *= 2
    f = np.fft.rfftfreq(len(grid), 1 / rate)
    c = np.cumsum(P) / P.sum()
    return float(f[min(np.searchsorted(c, fraction), f.size - 1)])


def exp_block_demo(cfg: BlockDemoConfig = BlockDemoConfig()) -> dict:
    """Full block-sampler pipeline on one bump signal.

    Returns the record plus the signal, filtered channel overlays,
    reconstruction and a sampling-rate audit against the signal's essential
    bandwidth.
    """
    cfg.validate()
    x = gen_block_sparse(cfg.intervals, cfg.T, cfg.dense_rate, cfg.pulse_family,
                         (cfg.seed, 0, WAVE))
    bs = BlockSamplerConfig.random(cfg.T, cfg.L, cfg.M, cfg.q, seed=(cfg.seed, 0, CHIPS))
    Y = block_sample(x, bs)
    system = build_block_system(Y, bs)
    seg = cfg.T / cfg.L
    active = sorted({s for a, b in cfg.intervals
                     for s in range(int(np.floor(a / seg + 1e-9)), int(np.ceil(b / seg - 1e-9)))})
    res, A_hat = solve_block(system, len(active), cfg.solver)
    x_hat = synthesize_block(A_hat, system.basis, bs, cfg.dense_rate)
    nse = normalized_squared_error(x.grid, x_hat)
    B = essential_bandwidth(x.grid, cfg.dense_rate, cfg.energy_fraction)
    ok = sorted(res.support.tolist()) == active
    trial = TrialResult(float(cfg.q), 0, (cfg.seed, 0), nse, ok)
    record = ExperimentRecord(float(cfg.q), nse, nse, nse, nse, float(ok), (trial,))
    return {
        "record": record,
        "nse": nse,
        "support": sorted(res.support.tolist()),
        "active_segments": active,
        "signal": x,
        "g": block_convolve(x, bs),
        "x_hat": x_hat,
        "samples": Y,
        "condition_number": system.cond,
        "sample_rate_hz": bs.sample_rate,
        "essential_bandwidth_hz": B,
        "nyquist_rate_hz": 2 * B,
        "rate_reduction": 2 * B / bs.sample_rate,
    }


# --------------------------------------------------------------------------
# basis mismatch
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BasisMismatchConfig:
    """RD recovery of tones at ``n/(T + delta)`` against the period-``T`` model."""

    T: float = 1.0
    N: int = 128
    M: int = 32
    K: int = 3
    deltas: tuple = (0.0, 1e-3, 1e-2, 1e-1)
    trials: int = 50
    seed: int = 1
    R: int = 32

    def checks(self) -> list[tuple[str, bool]]:
        return [
            ("N even", self.N % 2 == 0),
            ("M < N", 1 <= self.M < self.N),
            ("N mod M = 0", self.M >= 1 and self.N % self.M == 0),
            ("K ≤ M", 1 <= self.K <= self.M),
            ("trials >= 1", self.trials >= 1),
            ("delta sweep nonempty", len(self.deltas) > 0),
            ("R even (Simpson rule)", self.R >= 2 and self.R % 2 == 0),
        ]

    def validate(self):
        _raise_failed(self.checks())


def _mismatch_trial(cfg: BasisMismatchConfig, delta: float, trial: int) -> TrialResult:
    W = cfg.N / cfg.T
    rng = make_rng(cfg.seed, trial, SIGNAL)
    support = np.sort(rng.choice(np.arange(-cfg.N // 2, cfg.N // 2), cfg.K, replace=False))
    coeffs = (rng.standard_normal(cfg.K) + 1j * rng.standard_normal(cfg.K)) / np.sqrt(2)
    rd = RdConfig.random(cfg.T, W, cfg.M, seed=(cfg.seed, trial, CHIPS))
    t = np.arange(cfg.N * cfg.R + 1) / (cfg.R * W)
    x = np.exp(2j * np.pi * np.outer(t, support) / (cfg.T + delta)) @ coeffs
    y = rd_sample_grid(x, rd, cfg.R)
    system = build_rd_smv(rd, y)
    res = omp(system.A, system.y, cfg.K)
    _, x_hat = unweight_and_synthesize_multitone(res, system, rd, t)
    err = normalized_squared_error(x, x_hat)
    ok = set(system.index_map[res.support].tolist()) == set(support.tolist())
    return TrialResult(float(delta), trial, (cfg.seed, trial), err, ok)


def exp_basis_mismatch(cfg: BasisMismatchConfig = BasisMismatchConfig(),
                       jobs: int | None = 1) -> list[ExperimentRecord]:
    """Per ``delta``: off-grid tones, grid RD samples, OMP on the on-grid system.

    The error is the normalised squared error over ``[0, T]``.  ``delta`` is
    in seconds.
    """
    cfg.validate()
    tasks = [(d, t) for d in cfg.deltas for t in range(cfg.trials)]
    return _records(_run(_mismatch_trial, cfg, tasks, jobs))


# --------------------------------------------------------------------------
# one-shot pipelines
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RdPipelineConfig:
    """One seeded sparse multitone signal through the RD and OMP."""

    T: float = 1.0
    N: int = 64
    M: int = 8
    K: int = 4
    seed: int = 1

    def checks(self) -> list[tuple[str, bool]]:
        return [
            ("N even", self.N % 2 == 0),
            ("M < N", 1 <= self.M < self.N),
            ("N mod M = 0", self.M >= 1 and self.N % self.M == 0),
            ("K ≤ M", 1 <= self.K <= self.M),
            ("T > 0", self.T > 0),
        ]

    def validate(self):
        _raise_failed(self.checks())


def exp_rd_pipeline(cfg: RdPipelineConfig = RdPipelineConfig()) -> dict:
    cfg.validate()
    from .samplers import rd_sample_analytic
    from .signals import eval_multitone, gen_multitone

    W = cfg.N / cfg.T
    sig = gen_multitone((cfg.seed, 0, SIGNAL), cfg.T, W, cfg.K)
    rd = RdConfig.random(cfg.T, W, cfg.M, seed=(cfg.seed, 0, CHIPS))
    y = rd_sample_analytic(sig, rd)
    system = build_rd_smv(rd, y)
    res = omp(system.A, system.y, cfg.K)
    t = np.linspace(0, cfg.T, 8 * cfg.N + 1)
    _, x_hat = unweight_and_synthesize_multitone(res, system, rd, t)
    x = eval_multitone(sig, t)
    nse = normalized_squared_error(x, x_hat)
    ok = set(system.index_map[res.support].tolist()) == set(sig.support.tolist())
    trial = TrialResult(float(cfg.K), 0, (cfg.seed, 0), nse, ok)
    return {"record": ExperimentRecord(float(cfg.K), nse, nse, nse, nse, float(ok), (trial,)),
            "nse": nse, "t": t, "x": x, "x_hat": x_hat, "samples": y[None, :],
            "matrix": system.A}


@dataclass(frozen=True)
class MwcPipelineConfig:
    """One seeded multiband signal through the MWC, S-OMP and re-synthesis."""

    T: float = 1.0
    W_prime: float = 500.0
    L_prime: int = 50
    M_prime: float = 20.0
    q_prime: int = 10
    omega: int = 3
    R: int = 16
    seed: int = 1

    def checks(self) -> list[tuple[str, bool]]:
        return [
            ("q′ < M′", self.q_prime < self.M_prime),
            ("M′ ≤ L′", self.M_prime <= self.L_prime),
            ("Omega < q′", 1 <= self.omega < self.q_prime),
            ("Omega ≤ L′ - 1 (bands inside [-W′/2, W′/2))", self.omega <= self.L_prime - 1),
            ("R·M′ integer (decimation ratio)", _is_whole(self.R * self.M_prime)),
            ("T > 0", self.T > 0),
        ]

    def validate(self):
        _raise_failed(self.checks())


def exp_mwc_pipeline(cfg: MwcPipelineConfig = MwcPipelineConfig()) -> dict:
    cfg.validate()
    sl = _planted_slices(cfg.seed, 0, cfg.L_prime, cfg.omega)
    sig = gen_multiband(slice_bands(sl, cfg.L_prime, cfg.W_prime), None, cfg.W_prime,
                        cfg.T, cfg.R, (cfg.seed, 0, WAVE), mode="noise")
    mwc = MwcConfig.random(cfg.W_prime, cfg.L_prime, cfg.M_prime, cfg.q_prime,
                           seed=(cfg.seed, 0, CHIPS))
    Y = mwc_sample(sig, mwc, cfg.R)
    system = build_mwc_mmv(Y, mwc)
    res = somp(system.A, system.Y, cfg.omega)
    x_hat = synthesize_multiband(res, system, mwc, cfg.T, cfg.R)
    keep, T_kept = _edge_mask(sig.times, cfg.T, mwc.Tp)
    err = avg_squared_error(sig.grid, x_hat, T_kept, cfg.W_prime, sig.rate, keep)
    ok = set(system.index_map[res.support].tolist()) == set(sl.tolist())
    trial = TrialResult(float(cfg.q_prime), 0, (cfg.seed, 0), err, ok)
    return {"record": ExperimentRecord(float(cfg.q_prime), err, err, err, err, float(ok), (trial,)),
            "avg_squared_error": err, "t": sig.times, "x": sig.grid, "x_hat": x_hat,
            "samples": Y, "matrix": system.A}


EXPERIMENTS = {
    "channel-sweep": (ChannelSweepConfig, exp_channel_sweep),
    "windowing": (WindowingConfig, exp_windowing),
    "block-demo": (BlockDemoConfig, exp_block_demo),
    "basis-mismatch": (BasisMismatchConfig, exp_basis_mismatch),
    "rd-pipeline": (RdPipelineConfig, exp_rd_pipeline),
    "mwc-pipeline": (MwcPipelineConfig, exp_mwc_pipeline),
}

SWEEPS = {"channel-sweep", "windowing", "basis-mismatch"}


def config_dict(cfg) -> dict:
    return asdict(cfg)
