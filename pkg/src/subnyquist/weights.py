"""Closed-form scalars shared by the samplers and the linear systems."""

import numpy as np

__all__ = [
    "alpha",
    "chip_weight",
    "beta",
    "eta",
    "shift_indices",
    "harmonic_indices",
    "chip_fourier_coeffs",
]


def alpha(n, T: float, W: float) -> np.ndarray:
    """Integral of ``exp(j 2 pi n t / T)`` over one chip ``[0, 1/W)``.

    ``T (exp(j 2 pi n / N) - 1) / (j 2 pi n)`` for ``n != 0`` and ``1/W`` at 0.
    """
    n = np.asarray(n, dtype=float)
    N = T * W
    out = np.empty(n.shape, dtype=complex)
    nz = n != 0
    out[nz] = T * (np.exp(2j * np.pi * n[nz] / N) - 1) / (2j * np.pi * n[nz])
    out[~nz] = 1.0 / W
    return out


def chip_weight(m, L: int) -> np.ndarray:
    """Per-chip factor of the Fourier coefficients of an ``L``-chip periodic waveform.

    ``(1 - exp(-j 2 pi m / L)) / (j 2 pi m)``, with the limit ``1/L`` at 0.
    """
    m = np.asarray(m, dtype=float)
    out = np.empty(m.shape, dtype=complex)
    nz = m != 0
    out[nz] = (1 - np.exp(-2j * np.pi * m[nz] / L)) / (2j * np.pi * m[nz])
    out[~nz] = 1.0 / L
    return out


def beta(m, L: int, M: float, W: float) -> np.ndarray:
    """Frequency-domain MWC weights ``(W/M) * chip_weight(m, L)``.

    The zero term is the continuous limit ``W / (M L)``.
    """
    return (W / M) * chip_weight(m, L)


def eta(m, L: int) -> np.ndarray:
    """Multitone MWC weights for DFTs normalised by ``1/N`` (equal to ``chip_weight``)."""
    return chip_weight(m, L)


def shift_indices(L: int) -> np.ndarray:
    """``m_r = -floor((L + 1) / 2) + 1 + r`` for ``r = 0, ..., L-1``."""
    return -((L + 1) // 2) + 1 + np.arange(L)


def harmonic_indices(N: int) -> np.ndarray:
    """``n_r = -N/2 + r`` for ``r = 0, ..., N-1``."""
    return -(N // 2) + np.arange(N)


def chip_fourier_coeffs(values, m) -> np.ndarray:
    """Fourier-series coefficients of the periodic chip waveform, by exact integration.

    ``P(m) = (1/T_p) int_0^{T_p} p(t) exp(-j 2 pi m t / T_p) dt`` evaluated
    chip by chip from the antiderivative.  ``values`` may be a 2-D array with
    one pattern per row.
    """
    values = np.atleast_2d(np.asarray(values, dtype=float))
    L = values.shape[1]
    m = np.atleast_1d(np.asarray(m, dtype=float))
    edges = np.arange(L + 1) / L  # chip edges in units of T_p
    out = np.empty((values.shape[0], m.size), dtype=complex)
    nz = m != 0
    # antiderivative of exp(-j 2 pi m u) on [0, 1]
    F = np.exp(-2j * np.pi * np.multiply.outer(edges, m[nz])) / (-2j * np.pi * m[nz])
    out[:, nz] = values @ (F[1:] - F[:-1])
    out[:, ~nz] = values.sum(axis=1, keepdims=True) / L
    return out
