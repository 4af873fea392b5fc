"""Signal classes and random chipping waveforms.

Three signal families are covered:

* multitone signals, a finite Fourier series on ``[0, T]``;
* multiband signals, bandlimited signals whose spectrum occupies a few
  intervals, realised on a dense periodic grid;
* time block-sparse signals, real signals that vanish outside a few
  intervals of ``[0, t0]``.

All randomness flows through :func:`make_rng`, which keys a counter-based
Philox generator by a tuple of integers (experiment seed, trial, channel, ...).
Frequencies follow the ``exp(-j w t)`` forward-transform convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .exceptions import DomainError, InvalidParameter

__all__ = [
    "make_rng",
    "ChippingSequence",
    "gen_chipping",
    "MultitoneSignal",
    "gen_multitone",
    "eval_multitone",
    "multitone_grid",
    "MultibandSignal",
    "gen_multiband",
    "slice_bands",
    "window_signal",
    "spectrum",
    "BlockSparseSignal",
    "gen_block_sparse",
]


def _key(seed) -> list[int]:
    if np.isscalar(seed):
        seed = (seed,)
    key = [int(s) for s in seed]
    if any(k < 0 for k in key):
        raise InvalidParameter("seed components must be non-negative integers")
    return key


def make_rng(*seed) -> np.random.Generator:
    """Counter-based generator keyed by a tuple of non-negative integers.

    ``make_rng(7, 3, 0)`` and ``make_rng((7, 3, 0))`` are the same stream.
    Distinct keys give statistically independent streams, so every
    (experiment, trial, channel) triple can be regenerated in isolation.
    """
    if len(seed) == 1 and not np.isscalar(seed[0]):
        seed = tuple(seed[0])
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(_key(seed))))


# --------------------------------------------------------------------------
# chipping sequences
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ChippingSequence:
    """A +/-1 chip pattern and the rate at which the chips are clocked.

    The induced waveform ``p(t)`` equals ``values[l]`` on
    ``[l / chip_rate, (l + 1) / chip_rate)``; when ``periodic`` is set the
    pattern repeats with period ``len(values) / chip_rate``.
    """

    values: np.ndarray
    chip_rate: float = 1.0
    periodic: bool = False
    seed: tuple = ()

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise InvalidParameter("chip values must be a non-empty 1-D sequence")
        if not np.all(np.abs(v) == 1.0):
            raise InvalidParameter("chip values must be +1 or -1")
        if self.chip_rate <= 0:
            raise InvalidParameter("chip_rate must be positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size

    @property
    def period(self) -> float:
        return self.values.size / self.chip_rate

    def waveform(self, t) -> np.ndarray:
        """Evaluate ``p(t)``; outside the pattern a non-periodic waveform is 0."""
        t = np.asarray(t, dtype=float)
        idx = np.floor(t * self.chip_rate + 1e-9).astype(int)
        if self.periodic:
            return self.values[np.mod(idx, self.values.size)]
        out = np.zeros(t.shape)
        ok = (idx >= 0) & (idx < self.values.size)
        out[ok] = self.values[idx[ok]]
        return out

    def on_grid(self, R: int, n_samples: int | None = None) -> np.ndarray:
        """Sample the waveform on a grid with ``R`` points per chip.

        Grid points that fall exactly on a chip boundary take the mean of the
        two adjacent chips (the value the Fourier series converges to), so
        the grid spectrum is the aliased spectrum of the continuous waveform.
        """
        R = int(R)
        if R < 1:
            raise InvalidParameter("R must be >= 1")
        L = self.values.size
        if n_samples is None:
            n_samples = L * R
        s = np.arange(n_samples)
        idx = s // R
        if self.periodic:
            cur = self.values[idx % L]
            prev = self.values[(idx - 1) % L]
        else:
            cur = np.where(idx < L, self.values[np.minimum(idx, L - 1)], 0.0)
            prev = np.where((idx - 1 >= 0) & (idx - 1 < L),
                            self.values[np.clip(idx - 1, 0, L - 1)], 0.0)
        out = cur.astype(float).copy()
        edge = s % R == 0
        out[edge] = 0.5 * (cur[edge] + prev[edge])
        return out


def gen_chipping(seed, length: int, chip_rate: float = 1.0,
                 periodic: bool = False) -> ChippingSequence:
    """Draw ``length`` i.i.d. symmetric Bernoulli (+/-1) chips."""
    if int(length) < 1:
        raise InvalidParameter("chipping length must be >= 1")
    rng = make_rng(seed)
    values = 2.0 * rng.integers(0, 2, size=int(length)) - 1.0
    return ChippingSequence(values, chip_rate, periodic, tuple(_key(seed)))


# --------------------------------------------------------------------------
# multitone signals
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MultitoneSignal:
    """``x(t) = sum_n X(n) exp(j 2 pi n t / T)`` over a sparse harmonic set."""

    T: float
    W: float
    support: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        N = self.T * self.W
        if abs(N - round(N)) > 1e-9 * max(1.0, N):
            raise InvalidParameter("T*W must be an integer")
        N = int(round(N))
        if N <= 0 or N % 2:
            raise InvalidParameter(f"N = T*W must be even and positive, got {N}")
        support = np.asarray(self.support, dtype=int).ravel()
        coeffs = np.asarray(self.coeffs, dtype=complex).ravel()
        if support.size != coeffs.size:
            raise InvalidParameter("support and coeffs must have equal length")
        if np.unique(support).size != support.size:
            raise InvalidParameter("support indices must be distinct")
        if support.size and (support.min() < -N // 2 or support.max() > N // 2 - 1):
            raise InvalidParameter("harmonic indices must lie in [-N/2, N/2-1]")
        order = np.argsort(support)
        support, coeffs = support[order], coeffs[order]
        support.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def N(self) -> int:
        return int(round(self.T * self.W))

    @property
    def K(self) -> int:
        return self.support.size

    def dense_coeffs(self) -> np.ndarray:
        """Length-N coefficient vector ordered n = -N/2, ..., N/2-1."""
        X = np.zeros(self.N, dtype=complex)
        X[self.support + self.N // 2] = self.coeffs
        return X

    def combine(self, a: complex, other: "MultitoneSignal", b: complex) -> "MultitoneSignal":
        """Coefficient-wise ``a*self + b*other``."""
        if not (np.isclose(self.T, other.T) and np.isclose(self.W, other.W)):
            raise InvalidParameter("signals must share T and W")
        X = a * self.dense_coeffs() + b * other.dense_coeffs()
        n = np.flatnonzero(X) - self.N // 2
        return MultitoneSignal(self.T, self.W, n, X[n + self.N // 2])

    def __call__(self, t):
        return eval_multitone(self, t)


def gen_multitone(seed, T: float, W: float, K: int, *,
                  harmonics: Sequence[int] | None = None) -> MultitoneSignal:
    """Random K-sparse multitone signal with complex Gaussian coefficients.

    The support is drawn uniformly without replacement from ``harmonics``
    (default: all of ``[-N/2, N/2-1]``).
    """
    N = int(round(T * W))
    rng = make_rng(seed)
    pool = np.arange(-N // 2, N // 2) if harmonics is None else np.asarray(harmonics)
    if K > pool.size:
        raise InvalidParameter("K exceeds the number of available harmonics")
    support = rng.choice(pool, size=K, replace=False)
    coeffs = (rng.standard_normal(K) + 1j * rng.standard_normal(K)) / np.sqrt(2)
    return MultitoneSignal(T, W, support, coeffs)


def eval_multitone(sig: MultitoneSignal, t) -> np.ndarray:
    """Evaluate the Fourier series at times ``t`` in ``[0, T]``."""
    t = np.asarray(t, dtype=float)
    tol = 1e-12 * sig.T
    if t.size and (t.min() < -tol or t.max() > sig.T + tol):
        raise DomainError("evaluation time outside [0, T]")
    if sig.K == 0:
        return np.zeros(t.shape, dtype=complex)
    phase = np.exp(2j * np.pi * np.multiply.outer(t, sig.support) / sig.T)
    return phase @ sig.coeffs


def multitone_grid(sig: MultitoneSignal, R: int, endpoint: bool = True) -> np.ndarray:
    """Samples of ``x`` at rate ``R*W`` on ``[0, T]`` (``N*R + 1`` points with endpoint)."""
    n = sig.N * int(R)
    t = np.arange(n + 1 if endpoint else n) / (R * sig.W)
    return eval_multitone(sig, t)


# --------------------------------------------------------------------------
# multiband signals
# --------------------------------------------------------------------------


def _check_bands(bands, W_prime) -> list[tuple[float, float]]:
    out = sorted((float(a), float(b)) for a, b in bands)
    lim = np.pi * W_prime * (1 + 1e-12)
    for a, b in out:
        if not a < b:
            raise InvalidParameter(f"band [{a}, {b}) is empty")
        if abs(a) > lim or abs(b) > lim:
            raise InvalidParameter("bands must lie inside [-pi W', pi W']")
    for (a0, b0), (a1, b1) in zip(out, out[1:]):
        if a1 < b0:
            raise InvalidParameter("bands overlap")
    return out


@dataclass(frozen=True)
class MultibandSignal:
    """A multiband signal realised on a periodic grid of rate ``R * W_prime``.

    ``bands`` are half-open intervals in rad/s.  ``nominal`` marks signals
    (e.g. windowed ones) whose true spectrum is no longer confined to them.
    """

    W_prime: float
    bands: tuple
    grid: np.ndarray
    R: int
    T_obs: float
    amplitudes: tuple = ()
    nominal: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def rate(self) -> float:
        return self.R * self.W_prime

    @property
    def K(self) -> int:
        return len(self.bands)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.grid.size) / self.rate

    @property
    def occupancy(self) -> float:
        """Fraction of the two-sided band ``2 pi W'`` occupied by the bands."""
        return sum(b - a for a, b in self.bands) / (2 * np.pi * self.W_prime)


def _band_mask(freqs_hz, band):
    a, b = band
    w = 2 * np.pi * freqs_hz
    return (w >= a) & (w < b)


def gen_multiband(bands, amplitudes=None, W_prime: float = 500.0, T_obs: float = 1.0,
                  R: int = 8, seed=0, mode: str = "noise",
                  center: float | None = None) -> MultibandSignal:
    """Synthesize a multiband signal by masking a spectrum on the grid.

    ``mode="noise"`` fills each band with seeded complex Gaussian bins scaled
    so the band contributes mean power ``amplitude**2``.  ``mode="pulse"``
    places a flat-spectrum (periodic sinc) pulse of peak magnitude
    ``amplitude`` and random phase in each band, all centred at ``center``
    (default ``T_obs / 2``).  Either way the grid spectrum vanishes exactly
    outside the declared bands.
    """
    if R < 2:
        raise InvalidParameter("R must be >= 2")
    bands = _check_bands(bands, W_prime)
    if amplitudes is None:
        amplitudes = [1.0] * len(bands)
    amplitudes = [float(a) for a in amplitudes]
    if len(amplitudes) != len(bands):
        raise InvalidParameter("one amplitude per band is required")
    n = R * W_prime * T_obs
    if abs(n - round(n)) > 1e-6:
        raise InvalidParameter("R * W' * T_obs must be an integer")
    n = int(round(n))
    rate = R * W_prime
    f = np.fft.fftfreq(n, 1 / rate)
    rng = make_rng(seed)
    Xk = np.zeros(n, dtype=complex)
    if center is None:
        center = 0.5 * T_obs
    c_idx = int(round(center * rate))
    for band, amp in zip(bands, amplitudes):
        m = _band_mask(f, band)
        nb = int(m.sum())
        if nb == 0:
            continue
        if mode == "noise":
            z = rng.standard_normal(nb) + 1j * rng.standard_normal(nb)
            # mean power of the band component = sum|Z|^2 / n^2
            z *= amp * n / np.linalg.norm(z)
            Xk[m] = z
        elif mode == "pulse":
            phase = np.exp(2j * np.pi * rng.random())
            k = np.flatnonzero(m)
            Xk[m] = amp * phase * (n / nb) * np.exp(-2j * np.pi * k * c_idx / n)
        else:
            raise InvalidParameter(f"unknown multiband mode {mode!r}")
    grid = np.fft.ifft(Xk)
    return MultibandSignal(W_prime, tuple(bands), grid, int(R), float(T_obs),
                           tuple(amplitudes), False,
                           {"mode": mode, "seed": tuple(_key(seed))})


def slice_bands(slices, L_prime: int, W_prime: float) -> list[tuple[float, float]]:
    """Bands (rad/s) occupying whole spectral slices with shift indices ``slices``.

    Slice ``m`` holds the frequencies that harmonic ``m`` of the mixing
    waveform brings to baseband: ``[-m f_p - f_p/2, -m f_p + f_p/2)`` Hz with
    ``f_p = W'/L'``.
    """
    fp = W_prime / L_prime
    return [(2 * np.pi * (-m * fp - fp / 2), 2 * np.pi * (-m * fp + fp / 2)) for m in slices]


def window_signal(sig: MultibandSignal, duration: float, offset: float = 0.0) -> MultibandSignal:
    """Zero the signal outside ``[offset, offset + duration)``."""
    if duration <= 0:
        raise InvalidParameter("window duration must be positive")
    if offset < 0 or offset + duration > sig.T_obs * (1 + 1e-12):
        raise InvalidParameter("window must lie inside the observation interval")
    t = sig.times
    eps = 0.5 / sig.rate
    w = (t >= offset - eps) & (t < offset + duration - eps)
    meta = dict(sig.meta, window=(float(offset), float(duration)))
    return replace(sig, grid=np.where(w, sig.grid, 0), nominal=True, meta=meta)


def spectrum(grid, rate: float):
    """Continuous-FT approximation ``X(omega_k) = dt * DFT(x)``.

    With this scaling ``sum |x|^2 dt == sum |X|^2 df`` (Parseval), where
    ``df = rate / n``.  Returns ``(omega_rad_s, X)`` in FFT order.
    """
    grid = np.asarray(grid)
    dt = 1.0 / rate
    omega = 2 * np.pi * np.fft.fftfreq(grid.size, dt)
    return omega, dt * np.fft.fft(grid)


# --------------------------------------------------------------------------
# block-sparse (time) signals
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockSparseSignal:
    """A real signal on ``[0, t0)`` that vanishes outside ``intervals``."""

    t0: float
    intervals: tuple
    grid: np.ndarray
    rate: float
    smoothness: str = "hann"

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.grid.size) / self.rate

    @property
    def occupancy(self) -> float:
        return sum(b - a for a, b in self.intervals) / self.t0


BUMP_WIDTH = 0.15  # cusp width of the "bumps" family, as a fraction of the interval


def _bump(u, family):
    # u in [0, 1] across the interval
    if family == "bumps":
        # cusped (1 + |v|/w)^-4 profile, tapered to vanish at the ends
        v = u - 0.5
        return (1 + np.abs(v) / BUMP_WIDTH) ** -4 * np.sin(np.pi * u) ** 2
    if family == "hann":
        return np.sin(np.pi * u) ** 2
    if family == "smooth":
        v = 2 * u - 1
        out = np.zeros_like(v)
        inside = np.abs(v) < 1
        out[inside] = np.exp(1 - 1 / (1 - v[inside] ** 2))
        return out
    raise InvalidParameter(f"unknown pulse family {family!r}")


def gen_block_sparse(intervals, t0: float = 1.0, dense_rate: float = 8000.0,
                     pulse_family: str = "hann", seed=0,
                     heights=None) -> BlockSparseSignal:
    """One bump per interval, with seeded heights in ``[0.5, 1.5)``.

    ``pulse_family`` is ``"hann"`` (raised cosine), ``"smooth"`` (the
    compactly supported ``exp(1 - 1/(1 - v^2))`` bump) or ``"bumps"`` (a
    cusped profile tapered by a raised cosine).  Every family vanishes at the
    interval ends, so the signal is continuous on ``[0, t0]``.
    """
    n = dense_rate * t0
    if abs(n - round(n)) > 1e-6:
        raise InvalidParameter("dense_rate * t0 must be an integer")
    n = int(round(n))
    ivs = sorted((float(a), float(b)) for a, b in intervals)
    for a, b in ivs:
        if not (0 <= a < b <= t0):
            raise InvalidParameter("intervals must satisfy 0 <= a < b <= t0")
    for (a0, b0), (a1, b1) in zip(ivs, ivs[1:]):
        if a1 < b0:
            raise InvalidParameter("intervals overlap")
    rng = make_rng(seed)
    if heights is None:
        heights = 0.5 + rng.random(len(ivs))
    t = np.arange(n) / dense_rate
    x = np.zeros(n)
    for (a, b), h in zip(ivs, heights):
        inside = (t >= a) & (t <= b)
        x[inside] += h * _bump((t[inside] - a) / (b - a), pulse_family)
    return BlockSparseSignal(float(t0), tuple(ivs), x, float(dense_rate), pulse_family)
