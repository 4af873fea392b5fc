"""Reconstruction error metrics and trial summaries."""

from __future__ import annotations

import numpy as np

from .exceptions import InvalidParameter

__all__ = ["avg_squared_error", "normalized_squared_error", "summarize"]


def _pair(x, xh):
    x = np.asarray(x)
    xh = np.asarray(xh)
    if x.shape != xh.shape:
        raise InvalidParameter(f"grids differ in shape: {x.shape} vs {xh.shape}")
    return x, xh


def avg_squared_error(x, x_hat, T: float, W_prime: float, rate: float | None = None,
                      keep=None) -> float:
    """``(1/(T W')) sum |x - x_hat|^2`` over Nyquist-rate samples.

    For a grid at ``rate`` Hz each point stands for ``W'/rate`` Nyquist
    samples, so the sum is rescaled by that factor; the value is then the
    mean error power over ``[0, T)`` whatever the grid density.  ``keep`` is
    an optional boolean mask (e.g. to drop edge-affected points); ``T``
    should then be the retained duration.
    """
    x, x_hat = _pair(x, x_hat)
    if T <= 0 or W_prime <= 0:
        raise InvalidParameter("T and W' must be positive")
    e = np.abs(x - x_hat) ** 2
    if keep is not None:
        e = e[np.asarray(keep, bool)]
    scale = 1.0 if rate is None else W_prime / rate
    return float(e.sum() * scale / (T * W_prime))


def normalized_squared_error(x, x_hat) -> float:
    """``|x - x_hat|^2 / |x|^2`` (0 when both vanish)."""
    x, x_hat = _pair(x, x_hat)
    den = float(np.sum(np.abs(x) ** 2))
    num = float(np.sum(np.abs(x - x_hat) ** 2))
    if den == 0:
        return 0.0 if num == 0 else float("inf")
    return num / den


def summarize(errors, support_ok=None) -> dict:
    """Mean, 10/50/90 percentiles and success rate of a set of trial errors."""
    e = np.asarray(errors, dtype=float)
    if e.size == 0:
        raise InvalidParameter("no trials to summarize")
    p10, p50, p90 = np.percentile(e, [10, 50, 90])
    ok = np.asarray(support_ok if support_ok is not None else [], dtype=bool)
    return {
        "mean": float(e.mean()),
        "p10": float(p10),
        "p50": float(p50),
        "p90": float(p90),
        "success_rate": float(ok.mean()) if ok.size else float("nan"),
    }
