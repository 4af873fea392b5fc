"""Underdetermined linear systems linking measurements to sparse unknowns.

Unknowns are always the *weighted* quantities the matrix forms act on
(``alpha * X`` for the random demodulator, ``chip_weight * gamma`` for the
converter, and so on).  Mapping solved unknowns back to signal quantities
is a separate step in :mod:`subnyquist.recovery`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import InvalidParameter, RankError
from .samplers import BlockSamplerConfig, MwcConfig, RdConfig, block_sample_times
from .signals import MultibandSignal
from .weights import alpha, beta, chip_weight, eta, harmonic_indices, shift_indices

__all__ = [
    "SmvSystem",
    "MmvSystem",
    "BlockSystem",
    "FourierBasis",
    "build_rd_smv",
    "build_mwc_mmv",
    "build_mwc_multitone_mmv",
    "build_mwc_multitone_smv",
    "mmv_column_as_smv",
    "build_rd_multiband_smv",
    "rd_multiband_frequencies",
    "finite_fourier_transform",
    "mwc_output_spectrum",
    "build_block_system",
]


def _frozen(a, dtype=complex):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SmvSystem:
    """``y = A z`` with ``z = weights * x`` over the unknowns in ``index_map``."""

    A: np.ndarray
    y: np.ndarray | None
    weights: np.ndarray
    index_map: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        A = _frozen(self.A)
        if A.ndim != 2:
            raise InvalidParameter("A must be a matrix")
        if not np.all(np.isfinite(A)):
            raise InvalidParameter("A must be finite")
        w = _frozen(self.weights)
        if w.shape != (A.shape[1],) or np.any(w == 0):
            raise InvalidParameter("one nonzero weight per column is required")
        idx = np.array(self.index_map)
        if idx.shape[0] != A.shape[1]:
            raise InvalidParameter("index_map must cover every column")
        idx.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "index_map", idx)
        if self.y is not None:
            y = _frozen(np.ravel(self.y))
            if y.size != A.shape[0]:
                raise InvalidParameter("y length must equal rows(A)")
            object.__setattr__(self, "y", y)

    @property
    def shape(self):
        return self.A.shape

    def with_measurements(self, y) -> "SmvSystem":
        return replace(self, y=y)


@dataclass(frozen=True)
class MmvSystem:
    """``Y = A Z`` with joint-sparse ``Z``; row ``r`` of ``Z`` is weighted by ``weights[r]``."""

    A: np.ndarray
    Y: np.ndarray
    weights: np.ndarray
    index_map: np.ndarray
    column_map: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        A = _frozen(self.A)
        Y = _frozen(np.atleast_2d(self.Y))
        if Y.shape[0] != A.shape[0]:
            raise InvalidParameter("Y must have one row per row of A")
        w = _frozen(self.weights)
        if w.shape != (A.shape[1],) or np.any(w == 0):
            raise InvalidParameter("one nonzero weight per unknown row is required")
        idx = np.array(self.index_map)
        if idx.shape[0] != A.shape[1]:
            raise InvalidParameter("index_map must cover every unknown row")
        idx.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "index_map", idx)

    @property
    def shape(self):
        return self.A.shape

    @property
    def Phi(self) -> np.ndarray:
        return self.meta.get("Phi")

    @property
    def Psi(self) -> np.ndarray:
        return self.meta.get("Psi")


@dataclass(frozen=True)
class FourierBasis:
    """``psi_n(t) = exp(j 2 pi n t / length)`` for ``D`` symmetric indices.

    ``n`` runs over ``-floor(D/2) .. ceil(D/2) - 1`` so that real segments
    are represented by (nearly) conjugate-symmetric coefficients.
    """

    length: float
    D: int

    @property
    def indices(self) -> np.ndarray:
        return -(self.D // 2) + np.arange(self.D)

    def __call__(self, t) -> np.ndarray:
        """``D x len(t)`` matrix of basis values."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.exp(2j * np.pi * np.multiply.outer(self.indices, t) / self.length)


@dataclass(frozen=True)
class BlockSystem:
    """``rhs = Y Psi^-1 = A_mat coeffs`` for the block-convolution sampler.

    ``Phi`` is the chip matrix as acquired.  Because samples are taken in the
    final segment window, shift ``l`` reads segment ``L-1-l``; ``A_mat``
    reorders ``Phi``'s columns so that unknown row ``s`` is segment ``s``.
    """

    Phi: np.ndarray
    Psi: np.ndarray
    Y: np.ndarray
    rhs: np.ndarray
    A_mat: np.ndarray
    basis: FourierBasis
    cond: float
    segment_map: np.ndarray

    @property
    def D(self) -> int:
        return self.Psi.shape[0]


# --------------------------------------------------------------------------
# random demodulator
# --------------------------------------------------------------------------


def build_rd_smv(cfg: RdConfig, y=None) -> SmvSystem:
    """``A = Sigma Psi`` with ``Psi[l, r] = exp(j 2 pi n_r l / N)``.

    Row ``k`` of ``Sigma`` holds the chips of integration window ``k``.
    The sign of the exponent matches the ``exp(+j 2 pi n t / T)`` synthesis
    of a multitone signal, so that ``A @ (alpha * X) == y`` holds exactly.
    """
    N, M = cfg.N, cfg.M
    if N % M:
        raise InvalidParameter("N mod M = 0 is required")
    c = N // M
    Sigma = np.zeros((M, N))
    rows = np.repeat(np.arange(M), c)
    Sigma[rows, np.arange(N)] = cfg.chips.values
    n = harmonic_indices(N)
    Psi = np.exp(2j * np.pi * np.outer(np.arange(N), n) / N)
    w = alpha(n, cfg.T, cfg.W)
    return SmvSystem(Sigma @ Psi, y, w, n, {"Sigma": Sigma, "Psi": Psi, "kind": "rd"})


def rd_multiband_frequencies(W_prime: float, D: int) -> np.ndarray:
    """Midpoints ``omega_i = -pi W' + delta (i + 1/2)``, ``delta = 2 pi W'/D``."""
    if int(D) < 1:
        raise InvalidParameter("D must be a positive integer")
    d = 2 * np.pi * W_prime / D
    return -np.pi * W_prime + d * (np.arange(D) + 0.5)


def build_rd_multiband_smv(y, cfg: RdConfig, D: int) -> SmvSystem:
    """Midpoint discretization of the RD acting on a multiband spectrum.

    ``cfg`` is an RD clocked at ``W'`` (``cfg.W``), so ``N' = T W'`` chips.
    Entry ``(k, i)`` is
    ``(delta/2 pi) sum_m p_{kN'/M+m} (exp(j w_i/W') - 1)/(j w_i) exp(j w_i (kN'/M + m)/W')``
    and the unknowns are ``X(w_i)``; all weights are 1.
    """
    D = int(D)
    if D < 1:
        raise InvalidParameter("D must be a positive integer")
    W, N, M = cfg.W, cfg.N, cfg.M
    om = rd_multiband_frequencies(W, D)
    delta = 2 * np.pi * W / D
    kern = (np.exp(1j * om / W) - 1) / (1j * om)  # midpoints never hit 0
    E = np.exp(1j * np.outer(np.arange(N), om) / W)  # N x D
    per_chip = cfg.chips.values[:, None] * E * kern[None, :]
    A = per_chip.reshape(M, N // M, D).sum(axis=1) * delta / (2 * np.pi)
    return SmvSystem(A, y, np.ones(D), om, {"kind": "rd-multiband", "delta": delta})


def finite_fourier_transform(grid, rate: float, omega) -> np.ndarray:
    """``int_0^T x(t) exp(-j w t) dt`` for a grid that is a trigonometric polynomial.

    The grid is read as ``x(t) = sum_k a_k exp(j 2 pi f_k t)`` with the
    coefficients of its DFT (``f_k`` in ``[-rate/2, rate/2)``), each of which
    integrates over ``[0, T]`` in closed form.
    """
    grid = np.asarray(grid)
    n = grid.size
    T = n / rate
    a = np.fft.fft(grid) / n
    f = np.fft.fftfreq(n, 1 / rate)
    keep = np.abs(a) > 0
    a, f = a[keep], f[keep]
    z = 2 * np.pi * f[None, :] - np.asarray(omega, dtype=float)[:, None]
    zs = np.where(z == 0, 1.0, z)
    I = np.where(z == 0, T, (np.exp(1j * zs * T) - 1) / (1j * zs))
    return I @ a


# --------------------------------------------------------------------------
# modulated wideband converter
# --------------------------------------------------------------------------


def _mwc_matrices(cfg: MwcConfig):
    m = shift_indices(cfg.L_prime)
    Psi = np.exp(-2j * np.pi * np.outer(np.arange(cfg.L_prime), m) / cfg.L_prime)
    return cfg.Phi, Psi, m


def build_mwc_mmv(samples, cfg: MwcConfig) -> MmvSystem:
    """``Y = Phi Psi Z`` from per-channel sample sequences.

    ``Psi[l, r] = exp(-j 2 pi l m_r / L')``.  Row ``r`` of ``Z`` is
    ``chip_weight(m_r) gamma_r``, i.e. ``beta(m_r) gamma_r / f_s``, where
    ``gamma_r`` are the samples of slice ``m_r`` shifted to baseband.  The
    stored weights are ``beta(m_r)``.
    """
    if isinstance(samples, (list, tuple)):
        lens = {len(s) for s in samples}
        if len(lens) > 1:
            raise InvalidParameter("channel sequences must have equal length")
    Y = np.atleast_2d(np.asarray(samples, dtype=complex))
    if Y.shape[0] != cfg.q_prime:
        raise InvalidParameter(f"expected {cfg.q_prime} channels, got {Y.shape[0]}")
    Phi, Psi, m = _mwc_matrices(cfg)
    w = beta(m, cfg.L_prime, cfg.M_prime, cfg.W_prime)
    return MmvSystem(Phi @ Psi, Y, w, m, None,
                     {"Phi": Phi, "Psi": Psi, "kind": "mwc", "fs": cfg.fs,
                      "fp": cfg.fp, "L_prime": cfg.L_prime, "W_prime": cfg.W_prime})


def _multitone_bins(N: int) -> np.ndarray:
    return -(N // 2) + np.arange(N)


def build_mwc_multitone_mmv(samples, cfg: MwcConfig) -> MmvSystem:
    """Frequency-domain MMV of the converter on a multitone input (``L' = M'``).

    ``Y[:, v]`` is the DFT (normalised by ``1/N``) of the ``N`` samples per
    channel at bin ``n_v = -floor(N/2) + v``.  Unknown ``Z[r, v]`` equals
    ``eta(m_r) X(n_v - N m_r)``; ``column_map`` holds ``n_v``.
    """
    if not np.isclose(cfg.L_prime, cfg.M_prime):
        raise InvalidParameter("the multitone MMV requires L' = M'")
    Ys = np.atleast_2d(np.asarray(samples, dtype=complex))
    if Ys.shape[0] != cfg.q_prime:
        raise InvalidParameter(f"expected {cfg.q_prime} channels, got {Ys.shape[0]}")
    N = Ys.shape[1]
    bins = _multitone_bins(N)
    F = np.fft.fft(Ys, axis=1) / N
    Y = F[:, np.mod(bins, N)]
    Phi, Psi, m = _mwc_matrices(cfg)
    return MmvSystem(Phi @ Psi, Y, eta(m, cfg.L_prime), m, bins,
                     {"Phi": Phi, "Psi": Psi, "kind": "mwc-multitone", "N": N})


def build_mwc_multitone_smv(samples, cfg: MwcConfig) -> SmvSystem:
    """The ``N = 1`` multitone system built directly as an SMV problem.

    One sample per channel; entry ``(i, r)`` is ``sum_l p_il exp(-j 2 pi l m_r / L')``
    and unknown ``r`` is ``eta(m_r) X(-m_r)``.
    """
    y = np.asarray(samples, dtype=complex).reshape(cfg.q_prime, -1)
    if y.shape[1] != 1:
        raise InvalidParameter("the SMV collapse needs exactly one sample per channel")
    m = shift_indices(cfg.L_prime)
    l = np.arange(cfg.L_prime)
    A = np.empty((cfg.q_prime, m.size), dtype=complex)
    for i in range(cfg.q_prime):
        for r, mr in enumerate(m):
            A[i, r] = np.sum(cfg.chips[i] * np.exp(-2j * np.pi * l * mr / cfg.L_prime))
    return SmvSystem(A, y[:, 0], eta(m, cfg.L_prime), m, {"kind": "mwc-multitone-smv"})


def mmv_column_as_smv(system: MmvSystem, v: int = 0) -> SmvSystem:
    """Column ``v`` of an MMV system as an SMV problem."""
    return SmvSystem(system.A, system.Y[:, v], system.weights, system.index_map,
                     dict(system.meta, column=v))


def mwc_output_spectrum(sig: MultibandSignal, cfg: MwcConfig, V: int) -> np.ndarray:
    """Predicted DFT of each channel's ``V`` output samples from the input spectrum.

    For output bin frequency ``f`` in ``[-f_p/2, f_p/2)``:
    ``(W'/M') sum_m P_i(m) X(f - m f_p)``, with ``X`` the continuous-FT
    estimate of the grid and ``P_i(m)`` the Fourier coefficients of the chip
    waveform; bins outside the pass band are 0.  Returns ``q' x V`` in FFT order.
    """
    n = sig.grid.size
    _, Xc = _spectrum(sig)
    fb = np.fft.fftfreq(V, 1 / cfg.fs)
    inband = (fb >= -cfg.fp / 2) & (fb < cfg.fp / 2)
    Phi, Psi, m = _mwc_matrices(cfg)
    P = (Phi @ Psi) * chip_weight(m, cfg.L_prime)[None, :]
    src = fb[inband][None, :] - m[:, None] * cfg.fp  # L' x bins
    k = np.round(src * n / sig.rate).astype(int)
    valid = (np.abs(src) <= sig.rate / 2)
    Xs = np.where(valid, Xc[np.mod(k, n)], 0)
    out = np.zeros((cfg.q_prime, V), dtype=complex)
    out[:, inband] = cfg.fs * (P @ Xs)
    return out


def _spectrum(sig: MultibandSignal):
    from .signals import spectrum
    return spectrum(sig.grid, sig.rate)


# --------------------------------------------------------------------------
# block-convolution sampler
# --------------------------------------------------------------------------


def build_block_system(Y, cfg: BlockSamplerConfig, basis: FourierBasis | None = None,
                       max_cond: float = 1e12) -> BlockSystem:
    """``rhs = Y Psi^-1`` with ``Psi[n, k] = psi_n(k T/(L M))`` (``D = M``)."""
    Y = np.asarray(Y, dtype=complex)
    if Y.shape != (cfg.q, cfg.M):
        raise InvalidParameter(f"Y must be q x M = {cfg.q} x {cfg.M}")
    if basis is None:
        basis = FourierBasis(cfg.segment_length, cfg.M)
    if basis.D != cfg.M:
        raise InvalidParameter("D = M is required (square basis matrix)")
    if not np.isclose(basis.length, cfg.segment_length):
        raise InvalidParameter("basis length must equal the segment length T/L")
    t_local = block_sample_times(cfg) - (cfg.L - 1) * cfg.segment_length
    Psi = basis(t_local)
    cond = float(np.linalg.cond(Psi))
    if not np.isfinite(cond) or cond > max_cond:
        raise RankError(f"basis matrix is singular (condition number {cond:.3g})")
    rhs = np.linalg.solve(Psi.T, Y.T).T  # Y Psi^-1
    seg = np.arange(cfg.L - 1, -1, -1)  # shift l reads segment L-1-l
    A_mat = cfg.Phi[:, seg]
    return BlockSystem(cfg.Phi, Psi, Y, rhs, A_mat, basis, cond, np.arange(cfg.L))
