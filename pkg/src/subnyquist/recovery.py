"""Greedy sparse recovery (OMP, S-OMP), two-step support/least-squares
recovery, and re-synthesis of signals from solved unknowns."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidParameter
from .samplers import BlockSamplerConfig, MwcConfig, RdConfig
from .signals import MultitoneSignal, eval_multitone
from .systems import BlockSystem, FourierBasis, MmvSystem, SmvSystem

__all__ = [
    "RecoveryResult",
    "lstsq",
    "omp",
    "somp",
    "support_then_lsq",
    "weight",
    "unweight",
    "unweight_and_synthesize_multitone",
    "multitone_from_mmv",
    "slice_sequences",
    "synthesize_multiband",
    "synthesize_block",
    "solve_block",
]

RCOND = 1e-10
log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RecoveryResult:
    """Selected indices (in selection order) and their coefficient rows."""

    support: np.ndarray
    coeffs: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    n_unknowns: int
    residual_history: tuple = ()
    meta: dict = field(default_factory=dict)

    def dense(self) -> np.ndarray:
        """``n_unknowns x V`` coefficient matrix with zero rows off the support."""
        V = self.coeffs.shape[1] if self.coeffs.ndim == 2 else 1
        Z = np.zeros((self.n_unknowns, V), dtype=complex)
        if self.support.size:
            Z[self.support] = self.coeffs.reshape(self.support.size, V)
        return Z

    def to_dict(self) -> dict:
        c = np.atleast_2d(self.coeffs) if self.support.size else np.zeros((0, 0))
        return {
            "support": [int(s) for s in self.support],
            "coeffs": [[[float(z.real), float(z.imag)] for z in row] for row in c],
            "residual": float(self.residual_norm),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def lstsq(A, Y):
    """Rank-revealing least squares (singular values below ``1e-10 s_max`` dropped)."""
    return np.linalg.lstsq(A, Y, rcond=RCOND)[0]


def _greedy(A, Y, K, tol, aggregate):
    A = np.asarray(A, dtype=complex)
    Y = np.asarray(Y, dtype=complex)
    squeeze = Y.ndim == 1
    Y = Y.reshape(A.shape[0], -1)
    rows, cols = A.shape
    K = int(K)
    if K < 0 or K > rows:
        raise InvalidParameter(f"sparsity budget K={K} must satisfy 0 <= K <= rows(A)={rows}")
    norms = np.linalg.norm(A, axis=0)
    safe = np.where(norms > 0, norms, 1.0)
    ynorm = np.linalg.norm(Y)
    tol_eff = 1e-12 * ynorm if tol is None else float(tol)
    R = Y.copy()
    support: list[int] = []
    history = [float(ynorm)]
    coeffs = np.zeros((0, Y.shape[1]), dtype=complex)
    res = ynorm
    while len(support) < K and res > tol_eff:
        C = np.abs(A.conj().T @ R) / safe[:, None]
        score = C.sum(axis=1) if aggregate == "l1" else np.linalg.norm(C, axis=1)
        score[norms == 0] = -1
        score[support] = -1
        j = int(np.argmax(score))  # first maximum: lowest index wins ties
        if score[j] <= 0:
            break
        support.append(j)
        coeffs = lstsq(A[:, support], Y)
        R = Y - A[:, support] @ coeffs
        res = float(np.linalg.norm(R))
        history.append(res)
    if squeeze:
        coeffs = coeffs.reshape(len(support), 1)
    return RecoveryResult(np.array(support, dtype=int), coeffs, res, len(support),
                          bool(res <= tol_eff), cols, tuple(history),
                          {"tol": tol_eff, "aggregate": aggregate})


def omp(A, y, K: int, tol: float | None = None) -> RecoveryResult:
    """Orthogonal matching pursuit.

    The column with the largest normalised correlation ``|a_j^H r| / |a_j|``
    joins the support, then all selected coefficients are refit by least
    squares.  Stops after ``K`` selections or once the residual norm drops to
    ``tol`` (default ``1e-12 |y|``); ``converged`` reports the latter.
    """
    y = np.asarray(y)
    if y.ndim != 1:
        raise InvalidParameter("omp expects a single measurement vector")
    return _greedy(A, y, K, tol, "l1")


def somp(A, Y, K: int, tol: float | None = None, aggregate: str = "l1") -> RecoveryResult:
    """Simultaneous OMP: correlations are aggregated across measurement columns.

    ``aggregate="l1"`` sums magnitudes over columns; ``"l2"`` takes their
    Euclidean norm.  With a single column both reduce to :func:`omp`.
    """
    if aggregate not in ("l1", "l2"):
        raise InvalidParameter("aggregate must be 'l1' or 'l2'")
    Y = np.asarray(Y)
    if Y.ndim == 1:
        Y = Y[:, None]
    return _greedy(A, Y, K, tol, aggregate)


def support_then_lsq(A, Y, K: int, frame: str = "orthonormal",
                     tol: float | None = None) -> RecoveryResult:
    """Two-step recovery: joint support from a basis of ``range(Y)``, then least squares.

    The basis comes from the eigen-decomposition of ``Y Y^H``
    (eigenvalues below ``1e-10`` of the largest are discarded).
    ``frame="orthonormal"`` uses the eigenvectors; ``"scaled"`` weights them
    by the square roots of their eigenvalues.
    """
    A = np.asarray(A, dtype=complex)
    Y = np.asarray(Y, dtype=complex).reshape(A.shape[0], -1)
    if int(K) > A.shape[0]:
        raise InvalidParameter("K must not exceed rows(A)")
    lam, U = np.linalg.eigh(Y @ Y.conj().T)
    top = lam.max() if lam.size else 0.0
    if top <= 0:
        return RecoveryResult(np.zeros(0, int), np.zeros((0, Y.shape[1]), complex), 0.0, 0,
                              True, A.shape[1], (0.0,), {"rank": 0})
    keep = lam > RCOND * top
    G = U[:, keep]
    if frame == "scaled":
        G = G * np.sqrt(lam[keep])[None, :]
    elif frame != "orthonormal":
        raise InvalidParameter("frame must be 'orthonormal' or 'scaled'")
    first = somp(A, G, K, tol=1e-12 * np.linalg.norm(G) if tol is None else tol)
    S = first.support
    coeffs = lstsq(A[:, S], Y) if S.size else np.zeros((0, Y.shape[1]), complex)
    res = float(np.linalg.norm(Y - A[:, S] @ coeffs)) if S.size else float(np.linalg.norm(Y))
    tol_eff = 1e-12 * np.linalg.norm(Y) if tol is None else tol
    return RecoveryResult(S, coeffs, res, first.iterations, bool(res <= tol_eff),
                          A.shape[1], first.residual_history,
                          {"rank": int(keep.sum()), "frame": frame})


# --------------------------------------------------------------------------
# unweighting and synthesis
# --------------------------------------------------------------------------


def weight(values, weights) -> np.ndarray:
    """Row-wise ``weights * values`` (the unknowns the systems solve for)."""
    values = np.asarray(values, dtype=complex)
    w = np.asarray(weights, dtype=complex)
    return values * (w[:, None] if values.ndim == 2 else w)


def unweight(values, weights) -> np.ndarray:
    """Inverse of :func:`weight`; every weight must be nonzero."""
    w = np.asarray(weights, dtype=complex)
    if np.any(w == 0):
        raise InvalidParameter("cannot unweight by a zero weight")
    values = np.asarray(values, dtype=complex)
    return values / (w[:, None] if values.ndim == 2 else w)


def unweight_and_synthesize_multitone(result: RecoveryResult, system: SmvSystem,
                                      cfg: RdConfig, t=None):
    """``X(n) = z_n / alpha(n)`` on the support; evaluate at ``t`` (default: grid of ``N`` points).

    Returns ``(signal, values)``.
    """
    S = result.support
    w = system.weights[S]
    assert np.all(w != 0)
    X = unweight(result.coeffs[:, 0] if S.size else np.zeros(0), w)
    sig = MultitoneSignal(cfg.T, cfg.W, system.index_map[S], X)
    if t is None:
        t = np.arange(cfg.N) / cfg.W
    return sig, eval_multitone(sig, t)


def multitone_from_mmv(result: RecoveryResult, system: MmvSystem, T: float, W: float,
                       rel_tol: float = 1e-9) -> MultitoneSignal:
    """Harmonic coefficients from a solved multitone MMV system.

    ``Z[r, v] / eta(m_r)`` is ``X(n_v - N m_r)``; entries below ``rel_tol``
    of the largest are treated as zero.
    """
    N = system.Y.shape[1]
    if not result.support.size:
        return MultitoneSignal(T, W, [], [])
    Xs = unweight(np.atleast_2d(result.coeffs), system.weights[result.support])
    m = system.index_map[result.support]
    h = system.column_map[None, :] - N * m[:, None]
    mag = np.abs(Xs)
    keep = mag > rel_tol * mag.max() if mag.max() > 0 else np.zeros_like(mag, bool)
    # for even L' the outermost slice straddles the band edge; harmonics it
    # maps beyond [-N_t/2, N_t/2) cannot belong to the signal
    Nt = int(round(T * W))
    inside = (h >= -(Nt // 2)) & (h < Nt // 2)
    dropped = keep & ~inside
    if dropped.any():
        log.warning("dropping %d recovered entries outside the harmonic range", int(dropped.sum()))
    keep &= inside
    return MultitoneSignal(T, W, h[keep], Xs[keep])


def slice_sequences(result: RecoveryResult, system: MmvSystem) -> np.ndarray:
    """Baseband slice samples ``gamma_r(k) = f_s Z_r / beta(m_r)`` on the support."""
    fs = system.meta["fs"]
    if not result.support.size:
        return np.zeros((0, system.Y.shape[1]), complex)
    return fs * unweight(np.atleast_2d(result.coeffs), system.weights[result.support])


def synthesize_multiband(result: RecoveryResult, system: MmvSystem, cfg: MwcConfig,
                         T_obs: float, R: int, method: str = "sinc",
                         chunk: int = 4096) -> np.ndarray:
    """Re-synthesise ``x`` on the grid ``t = s / (R W')`` over ``[0, T_obs)``.

    Each recovered slice sequence is interpolated from its samples at the
    channel rate ``f_s`` (Whittaker-Shannon),
    ``gamma_r(t) = sum_k gamma_r(k) sinc(f_s t - k)``, then shifted back by
    ``exp(-j 2 pi m_r f_p t)``.  A kernel cut off at the slice edge
    ``W'/(2L')`` would halve the bin lying on the half-open band edge, so the
    full channel band is used instead.
    Only the acquired samples enter the sum, so the result is the finite
    linear approximation of ``x``; it is inexact near the ends of the record.
    ``method="periodic"`` instead treats the record as one period (exact for
    periodic inputs, used as a diagnostic).
    """
    n = R * cfg.W_prime * T_obs
    if abs(n - round(n)) > 1e-6:
        raise InvalidParameter("R * W' * T_obs must be an integer")
    n = int(round(n))
    t = np.arange(n) / (R * cfg.W_prime)
    out = np.zeros(n, dtype=complex)
    if not result.support.size:
        return out
    G = slice_sequences(result, system)
    m = system.index_map[result.support]
    fs, fp = cfg.fs, cfg.fp
    V = G.shape[1]
    if method == "sinc":
        k = np.arange(V)
        for a in range(0, n, chunk):
            tt = t[a:a + chunk]
            K = np.sinc(fs * tt[:, None] - k[None, :])
            base = K @ G.T  # chunk x |S|
            out[a:a + chunk] = (base * np.exp(-2j * np.pi * np.outer(tt, m) * fp)).sum(axis=1)
    elif method == "periodic":
        f = np.fft.fftfreq(V, 1 / fs)
        band = (f >= -fp / 2) & (f < fp / 2)
        for g, mr in zip(G, m):
            Gk = np.fft.fft(g)
            # place each pass-band bin at its frequency on the dense grid
            Xd = np.zeros(n, dtype=complex)
            kd = np.round(f[band] * T_obs).astype(int)
            Xd[np.mod(kd, n)] = Gk[band] * (n / V)
            out += np.fft.ifft(Xd) * np.exp(-2j * np.pi * mr * fp * t)
    else:
        raise InvalidParameter(f"unknown synthesis method {method!r}")
    return out


def synthesize_block(A_hat, basis: FourierBasis, cfg: BlockSamplerConfig, dense_rate: float,
                     real: bool = True) -> np.ndarray:
    """Concatenate ``sum_n a_l(n) psi_n(t)`` over the ``L`` segments on a dense grid."""
    A_hat = np.asarray(A_hat, dtype=complex)
    if A_hat.shape != (cfg.L, basis.D):
        raise InvalidParameter(f"coefficients must be L x D = {cfg.L} x {basis.D}")
    if not np.isclose(basis.length, cfg.segment_length):
        raise InvalidParameter("basis length must equal the segment length")
    seg = dense_rate * cfg.segment_length
    if abs(seg - round(seg)) > 1e-6:
        raise InvalidParameter("dense rate must place a whole number of points per segment")
    seg = int(round(seg))
    t_local = np.arange(seg) / dense_rate
    vals = A_hat @ basis(t_local)  # L x seg
    out = vals.reshape(-1)
    return out.real if real else out


def solve_block(system: BlockSystem, K: int, solver: str = "somp") -> tuple[RecoveryResult, np.ndarray]:
    """Recover the segment coefficient matrix; returns ``(result, A_hat)`` with ``A_hat`` L x D."""
    if solver == "somp":
        res = somp(system.A_mat, system.rhs, K)
    elif solver == "support_then_lsq":
        res = support_then_lsq(system.A_mat, system.rhs, K)
    else:
        raise InvalidParameter(f"unknown solver {solver!r}")
    return res, res.dense()
