"""Acquisition chains: random demodulator, modulated wideband converter and
the block-convolution sampler.

Each chain is available on a dense simulation grid; where a closed form
exists (multitone inputs) an analytic sampler is provided as well, so the
two routes can certify each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidParameter
from .signals import (BlockSparseSignal, ChippingSequence, MultibandSignal,
                      MultitoneSignal, gen_chipping)
from .weights import chip_fourier_coeffs

__all__ = [
    "RdConfig",
    "MwcConfig",
    "BlockSamplerConfig",
    "rd_sample_analytic",
    "rd_sample_grid",
    "rd_sampling_function",
    "rd_filter_response",
    "rd_sample_filtered",
    "rd_output_spectrum",
    "mwc_sample",
    "mwc_sample_multitone",
    "mwc_single_channel_config",
    "mwc_single_channel_sample",
    "block_convolve",
    "block_sample",
    "block_sample_times",
]


def _is_int(x, tol=1e-9) -> bool:
    return abs(x - round(x)) <= tol * max(1.0, abs(x))


def _chip_matrix(chips, length=None) -> np.ndarray:
    rows = [c.values if isinstance(c, ChippingSequence) else np.asarray(c, float)
            for c in chips]
    P = np.vstack(rows) if rows else np.zeros((0, length or 0))
    if not np.all(np.abs(P) == 1):
        raise InvalidParameter("chip entries must be +/-1")
    return P


# --------------------------------------------------------------------------
# configurations
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RdConfig:
    """Random demodulator on ``[0, T]``: ``N = T W`` chips, ``M`` samples.

    ``allow_full_rate`` admits the uncompressed corner ``M = N``.
    """

    T: float
    W: float
    M: int
    chips: ChippingSequence
    allow_full_rate: bool = False

    def __post_init__(self):
        if not _is_int(self.T * self.W):
            raise InvalidParameter("N = T*W must be an integer")
        N = self.N
        if N <= 0 or N % 2:
            raise InvalidParameter(f"N = T*W must be even, got {N}")
        top = N if self.allow_full_rate else N - 1
        if not 1 <= self.M <= top:
            raise InvalidParameter(f"M < N is required (M={self.M}, N={N})")
        if N % self.M:
            raise InvalidParameter(f"N mod M = 0 is required (N={N}, M={self.M})")
        if len(self.chips) != N:
            raise InvalidParameter("the RD needs exactly N chips")

    @property
    def N(self) -> int:
        return int(round(self.T * self.W))

    @property
    def chips_per_sample(self) -> int:
        return self.N // self.M

    @property
    def Ts(self) -> float:
        return self.T / self.M

    @classmethod
    def random(cls, T: float, W: float, M: int, seed=0,
               allow_full_rate: bool = False) -> "RdConfig":
        N = int(round(T * W))
        return cls(T, W, M, gen_chipping(seed, N, W), allow_full_rate)


@dataclass(frozen=True)
class MwcConfig:
    """Modulated wideband converter with ``q'`` channels.

    ``require_sub_nyquist`` enforces ``q' < M'`` (average rate below
    Nyquist).  Some reference configurations oversample on average, so the
    check can be relaxed; ``M' <= L'`` is always enforced.
    """

    W_prime: float
    L_prime: int
    M_prime: float
    q_prime: int
    chips: np.ndarray
    require_sub_nyquist: bool = True

    def __post_init__(self):
        P = _chip_matrix(np.atleast_2d(self.chips) if not isinstance(self.chips, (list, tuple))
                         else self.chips, self.L_prime)
        if P.shape != (self.q_prime, self.L_prime):
            raise InvalidParameter(
                f"chips must be q' x L' = {self.q_prime} x {self.L_prime}, got {P.shape}")
        if not self.M_prime <= self.L_prime:
            raise InvalidParameter("M' <= L' is required (T_s <= T_p)")
        if self.M_prime <= 0 or self.q_prime < 1:
            raise InvalidParameter("M' > 0 and q' >= 1 are required")
        if self.require_sub_nyquist and not self.q_prime < self.M_prime:
            raise InvalidParameter("q' < M' is required (average rate below Nyquist)")
        P.setflags(write=False)
        object.__setattr__(self, "chips", P)

    @property
    def Phi(self) -> np.ndarray:
        return self.chips

    @property
    def Tp(self) -> float:
        return self.L_prime / self.W_prime

    @property
    def Ts(self) -> float:
        return self.M_prime / self.W_prime

    @property
    def fp(self) -> float:
        """Slice width ``W'/L'`` in Hz."""
        return self.W_prime / self.L_prime

    @property
    def fs(self) -> float:
        """Per-channel sampling rate ``W'/M'`` in Hz."""
        return self.W_prime / self.M_prime

    @property
    def average_rate(self) -> float:
        return self.q_prime * self.fs

    def subset(self, q: int) -> "MwcConfig":
        """The first ``q`` channels."""
        return MwcConfig(self.W_prime, self.L_prime, self.M_prime, q, self.chips[:q],
                         self.require_sub_nyquist)

    @classmethod
    def random(cls, W_prime: float, L_prime: int, M_prime: float, q_prime: int,
               seed=0, require_sub_nyquist: bool = True) -> "MwcConfig":
        """Chips for channel ``i`` are drawn from the stream ``(*seed, i)``."""
        seed = (seed,) if np.isscalar(seed) else tuple(seed)
        rows = [gen_chipping((*seed, i), L_prime, W_prime, periodic=True).values
                for i in range(q_prime)]
        return cls(W_prime, L_prime, M_prime, q_prime, np.vstack(rows), require_sub_nyquist)


@dataclass(frozen=True)
class BlockSamplerConfig:
    """Block-convolution sampler: ``q`` channels, ``L`` segments, ``M`` samples each."""

    T: float
    L: int
    M: int
    q: int
    chips: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        P = _chip_matrix(np.atleast_2d(self.chips), self.L)
        if P.shape != (self.q, self.L):
            raise InvalidParameter(f"chips must be q x L = {self.q} x {self.L}")
        if self.M < 1 or self.L < 1:
            raise InvalidParameter("L and M must be positive")
        P.setflags(write=False)
        object.__setattr__(self, "chips", P)

    @property
    def Phi(self) -> np.ndarray:
        return self.chips

    @property
    def D(self) -> int:
        return self.M

    @property
    def sample_rate(self) -> float:
        return self.L * self.M / self.T

    @property
    def segment_length(self) -> float:
        return self.T / self.L

    @classmethod
    def random(cls, T: float, L: int, M: int, q: int, seed=0) -> "BlockSamplerConfig":
        seed = (seed,) if np.isscalar(seed) else tuple(seed)
        rows = [gen_chipping((*seed, i), L).values for i in range(q)]
        return cls(T, L, M, q, np.vstack(rows))


# --------------------------------------------------------------------------
# random demodulator
# --------------------------------------------------------------------------


def rd_sample_analytic(sig: MultitoneSignal, cfg: RdConfig) -> np.ndarray:
    """Exact RD samples of a multitone signal.

    Each chip interval is integrated in closed form from the antiderivative
    of ``exp(j 2 pi n t / T)``, then the chip integrals are summed per
    integrate-and-dump window.
    """
    if not (np.isclose(sig.T, cfg.T) and np.isclose(sig.W, cfg.W)):
        raise InvalidParameter("signal and RD configuration disagree on T or W")
    N, M = cfg.N, cfg.M
    n = sig.support.astype(float)
    edges = np.arange(N + 1) / cfg.W
    chip_int = np.empty((N, n.size), dtype=complex)
    nz = n != 0
    F = np.exp(2j * np.pi * np.multiply.outer(edges, n[nz]) / cfg.T) * (
        cfg.T / (2j * np.pi * n[nz]))
    chip_int[:, nz] = F[1:] - F[:-1]
    chip_int[:, ~nz] = 1.0 / cfg.W
    per_chip = (cfg.chips.values[:, None] * chip_int) @ sig.coeffs
    return per_chip.reshape(M, N // M).sum(axis=1)


def _chip_quadrature_weights(R: int, rule: str) -> np.ndarray:
    if rule == "simpson":
        if R % 2:
            raise InvalidParameter("Simpson's rule needs an even number of points per chip")
        w = np.ones(R + 1)
        w[1:-1:2] = 4
        w[2:-1:2] = 2
        return w / 3
    if rule == "trapezoid":
        w = np.ones(R + 1)
        w[[0, -1]] = 0.5
        return w
    raise InvalidParameter(f"unknown quadrature rule {rule!r}")


def _chip_integrals(x_grid, N: int, W: float, R: int, rule: str) -> np.ndarray:
    if R < 2:
        raise InvalidParameter("R must be >= 2")
    x_grid = np.asarray(x_grid)
    if x_grid.size != N * R + 1:
        raise InvalidParameter(f"grid must hold N*R + 1 = {N * R + 1} samples on [0, T]")
    idx = np.arange(N)[:, None] * R + np.arange(R + 1)[None, :]
    w = _chip_quadrature_weights(R, rule) / (R * W)
    return x_grid[idx] @ w


def rd_sample_grid(x_grid, cfg: RdConfig, R: int, rule: str = "simpson") -> np.ndarray:
    """RD samples by quadrature of ``x(t) p(t)`` over each sampling window.

    ``x_grid`` holds ``x`` at ``t = s / (R W)``, ``s = 0..N R`` (endpoint
    included).  Chip edges fall on grid points, so each chip is integrated
    separately with its own constant sign.  Any input works, multitone or not.
    """
    c = _chip_integrals(x_grid, cfg.N, cfg.W, int(R), rule)
    return (cfg.chips.values * c).reshape(cfg.M, cfg.chips_per_sample).sum(axis=1)


def _rect(u):
    return (np.abs(u) <= 1).astype(float)


def rd_sampling_function(cfg: RdConfig, k: int, tau) -> np.ndarray:
    """``p(tau) rect(2k + 1 - 2 M tau / T)``; ``y(k)`` is ``<x, this>``."""
    tau = np.asarray(tau, dtype=float)
    return cfg.chips.waveform(tau) * _rect(2 * k + 1 - 2 * cfg.M * tau / cfg.T)


def rd_filter_response(cfg: RdConfig, t, tau) -> np.ndarray:
    """Time-varying impulse response ``h(t, tau) = p(tau) rect(2M(t - tau)/T - 1)``."""
    t = np.asarray(t, dtype=float)
    tau = np.asarray(tau, dtype=float)
    return cfg.chips.waveform(tau) * _rect(2 * cfg.M * (t - tau) / cfg.T - 1)


def rd_sample_filtered(x_grid, cfg: RdConfig, R: int, rule: str = "simpson") -> np.ndarray:
    """RD samples as ``int x(tau) h(t, tau) dtau`` at ``t = (k+1) T/M``.

    The filter is evaluated at each chip's midpoint (``p`` is constant per
    chip and the window edges are chip edges), and the chip integrals use the
    same rule as :func:`rd_sample_grid`.
    """
    c = _chip_integrals(x_grid, cfg.N, cfg.W, int(R), rule)
    mid = (np.arange(cfg.N) + 0.5) / cfg.W
    tk = (np.arange(cfg.M) + 1) * cfg.T / cfg.M
    H = rd_filter_response(cfg, tk[:, None], mid[None, :])
    return H @ c


def rd_output_spectrum(sig: MultitoneSignal, cfg: RdConfig, n_alias: int = 64) -> np.ndarray:
    """DFT of the RD output from the frequency-domain description.

    ``Y(n) = T sum_l C(n + l M) exp(j pi (n + l M)/M) sinc(pi (n + l M)/M)``,
    with ``C(n) = sum_m P(m) X(n - m)`` the Fourier coefficients of ``x p``
    on ``[0, T]``.  The alias sum over ``l`` is truncated to ``|l| <= n_alias``
    and converges as ``n_alias`` grows.
    """
    N, M = cfg.N, cfg.M
    nt = np.arange(M)[:, None] + M * np.arange(-n_alias, n_alias + 1)[None, :]
    # P(m) for every harmonic needed: m = n - h
    m = nt[..., None] - sig.support[None, None, :]
    pk = np.fft.fft(cfg.chips.values)  # sum_l p_l exp(-j 2 pi m l / N)
    mm = m.astype(float)
    w = np.where(mm == 0, 1.0 / N,
                 (1 - np.exp(-2j * np.pi * mm / N)) / (2j * np.pi * np.where(mm == 0, 1, mm)))
    P = pk[np.mod(m, N)] * w
    C = P @ sig.coeffs
    nn = nt.astype(float)
    H = np.exp(1j * np.pi * nn / M) * np.sinc(nn / M)
    return cfg.T * (C * H).sum(axis=1)


# --------------------------------------------------------------------------
# modulated wideband converter
# --------------------------------------------------------------------------


def _grid_of(x):
    if isinstance(x, MultibandSignal):
        return np.asarray(x.grid)
    return np.asarray(x)


def mwc_sample(x, cfg: MwcConfig, R: int, boundary: str = "periodic",
               pad_factor: int = 4) -> np.ndarray:
    """Channel outputs of the MWC on a dense grid of rate ``R W'``.

    Per channel: multiply by the periodic chip waveform, keep the FFT bins in
    ``[-W'/(2L'), W'/(2L'))`` Hz (ideal low-pass), and take every ``R M'``-th
    sample starting at ``t = 0``.

    ``boundary="periodic"`` filters circularly over the grid, which is exact
    for signals that are periodic on the grid (all generators here) provided
    the grid spans a whole number of chip periods.  ``boundary="padded"``
    zero-pads by ``pad_factor`` and treats ``x`` as zero outside the grid;
    its first and last outputs then carry edge effects.

    Returns a ``q' x V`` array.
    """
    g = _grid_of(x)
    R = int(R)
    if R < 2:
        raise InvalidParameter("R must be >= 2")
    U = R * cfg.M_prime
    if not _is_int(U):
        raise InvalidParameter("R * M' must be an integer (decimation ratio)")
    U = int(round(U))
    n = g.size
    if n % U:
        raise InvalidParameter("grid length must be a multiple of R * M'")
    V = n // U
    rate = R * cfg.W_prime
    chips_grid = np.vstack([
        ChippingSequence(row, cfg.W_prime, True).on_grid(R, n) for row in cfg.chips])
    if boundary == "periodic":
        if n % (R * cfg.L_prime):
            raise InvalidParameter("periodic boundary needs a whole number of chip periods")
        G = np.fft.fft(chips_grid * g[None, :], axis=1)
        f = np.fft.fftfreq(n, 1 / rate)
        keep = (f >= -cfg.fp / 2) & (f < cfg.fp / 2)
        bins = np.flatnonzero(keep)
        Z = np.zeros((cfg.q_prime, V), dtype=complex)
        # bin k of the dense FFT lands on bin k mod V after decimation; the
        # pass band holds at most V bins because M' <= L'
        Z[:, bins % V] = G[:, bins]
        return np.fft.ifft(Z, axis=1) * (V / n)
    if boundary == "padded":
        if pad_factor < 1:
            raise InvalidParameter("pad_factor must be >= 1")
        npad = n * (1 + int(pad_factor))
        G = np.fft.fft(chips_grid * g[None, :], n=npad, axis=1)
        f = np.fft.fftfreq(npad, 1 / rate)
        G[:, ~((f >= -cfg.fp / 2) & (f < cfg.fp / 2))] = 0
        out = np.fft.ifft(G, axis=1)[:, :n]
        return out[:, ::U]
    raise InvalidParameter(f"unknown boundary mode {boundary!r}")


def mwc_sample_multitone(sig: MultitoneSignal, cfg: MwcConfig) -> np.ndarray:
    """Exact MWC outputs for a multitone input when ``L' = M'``.

    The observation spans ``N`` chip periods (``T = N L' / W``, chip rate
    ``W = cfg.W_prime``).  Harmonic ``h`` is brought to baseband bin
    ``n = h + N m`` in ``[-floor(N/2), N - floor(N/2))`` by harmonic ``m`` of
    the mixing waveform, whose Fourier coefficient is integrated exactly.
    Returns ``q' x N`` samples at ``t = k T_s``.
    """
    if not np.isclose(cfg.L_prime, cfg.M_prime):
        raise InvalidParameter("the multitone MWC requires L' = M'")
    if not np.isclose(sig.W, cfg.W_prime):
        raise InvalidParameter("chip rate must equal the multitone bound W")
    N = sig.T / cfg.Tp
    if not _is_int(N):
        raise InvalidParameter("T must be an integer multiple of T_p")
    N = int(round(N))
    h = sig.support
    n = np.mod(h + N // 2, N) - N // 2
    m = (n - h) // N
    P = chip_fourier_coeffs(cfg.chips, m)  # q' x K
    k = np.arange(N)
    E = np.exp(2j * np.pi * np.multiply.outer(h, k) / N)  # K x N
    return (P * sig.coeffs[None, :]) @ E


def mwc_single_channel_config(cfg: MwcConfig, chips=None) -> MwcConfig:
    """One channel running ``q'`` times faster with a ``q'`` times wider low-pass.

    ``M'' = M'/q'`` and ``L'' = L'/q'``: sampling at ``q' W'/M'`` Hz with
    cut-off ``q' W'/L'`` Hz (full width), so ``M'' <= L''`` still holds.  The
    chip pattern has ``L'/q'`` chips; by default the leading chips of
    channel 0, which makes ``q' = 1`` the identity.
    """
    q = cfg.q_prime
    if cfg.L_prime % q:
        raise InvalidParameter("q' must divide L' for the single-channel collapse")
    L1 = cfg.L_prime // q
    row = cfg.chips[0, :L1] if chips is None else np.asarray(chips, float).reshape(1, -1)
    return MwcConfig(cfg.W_prime, L1, cfg.M_prime / q, 1, np.reshape(row, (1, L1)), False)


def mwc_single_channel_sample(x, cfg: MwcConfig, R: int, boundary: str = "periodic") -> np.ndarray:
    """Output sequence of the single-channel collapse of ``cfg``."""
    return mwc_sample(x, mwc_single_channel_config(cfg), R, boundary)[0]


# --------------------------------------------------------------------------
# block-convolution sampler
# --------------------------------------------------------------------------


def _block_geometry(x: BlockSparseSignal, cfg: BlockSamplerConfig):
    if not np.isclose(x.t0, cfg.T):
        raise InvalidParameter("signal duration must equal the sampler's T")
    n = x.grid.size
    seg = n / cfg.L
    stride = x.rate / cfg.sample_rate
    if not (_is_int(seg) and _is_int(stride)):
        raise InvalidParameter("dense grid must align with segments and sample times")
    return n, int(round(seg)), int(round(stride))


def block_convolve(x: BlockSparseSignal, cfg: BlockSamplerConfig) -> np.ndarray:
    """``g_i(t) = sum_l p_i(l) x(t - l T/L)`` on the dense grid (zero extension)."""
    n, seg, _ = _block_geometry(x, cfg)
    g = np.zeros((cfg.q, n))
    for l in range(cfg.L):
        shifted = np.zeros(n)
        shifted[l * seg:] = x.grid[:n - l * seg]
        g += np.outer(cfg.chips[:, l], shifted)
    return g


def block_sample_times(cfg: BlockSamplerConfig) -> np.ndarray:
    """Sample instants ``(L-1) T/L + k T/(L M)``, ``k = 0..M-1``.

    In this final segment window every shift ``l`` of the linear block
    convolution reads a distinct segment of ``x`` (segment ``L-1-l``).
    """
    return (cfg.L - 1) * cfg.segment_length + np.arange(cfg.M) * cfg.T / (cfg.L * cfg.M)


def block_sample(x: BlockSparseSignal, cfg: BlockSamplerConfig) -> np.ndarray:
    """``q x M`` samples of the block-convolved channels."""
    n, seg, stride = _block_geometry(x, cfg)
    s = (cfg.L - 1) * seg + stride * np.arange(cfg.M)
    # rows: shift l reads x at s - l*seg
    Xs = np.stack([x.grid[s - l * seg] for l in range(cfg.L)])
    return cfg.chips @ Xs
