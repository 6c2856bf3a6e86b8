"""Small numerical kernels shared across modules."""

import numpy as np


def normalize_log_weights(logw: np.ndarray) -> np.ndarray:
    """Softmax over the last axis with max-subtraction (no overflow for any finite input)."""
    logw = np.asarray(logw, dtype=float)
    # a gap wider than the float range rounds to -inf, whose weight is exactly 0
    with np.errstate(over="ignore"):
        shifted = logw - logw.max(axis=-1, keepdims=True)
    w = np.exp(shifted)
    return w / w.sum(axis=-1, keepdims=True)


def log_normalizer(logw: np.ndarray) -> np.ndarray:
    """``log sum exp`` over the last axis."""
    m = logw.max(axis=-1, keepdims=True)
    return (m + np.log(np.exp(logw - m).sum(axis=-1, keepdims=True)))[..., 0]


def shannon_entropy(pi) -> np.ndarray:
    """``-sum pi ln pi`` over the last axis, with ``0 ln 0 = 0``."""
    pi = np.asarray(pi, dtype=float)
    if np.any(pi < 0):
        raise ValueError("probabilities must be nonnegative")
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(pi > 0, pi * np.log(np.where(pi > 0, pi, 1.0)), 0.0)
    h = -terms.sum(axis=-1)
    # clamp rounding noise below zero
    h = np.maximum(h, 0.0)
    return float(h) if h.ndim == 0 else h


def cumulative_trapezoid(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Running trapezoid integral along the last axis, starting at 0."""
    dx = np.diff(x)
    inc = 0.5 * (y[..., 1:] + y[..., :-1]) * dx
    out = np.zeros(y.shape)
    np.cumsum(inc, axis=-1, out=out[..., 1:])
    return out


def simpson(y: np.ndarray, h: float) -> np.ndarray:
    """Composite Simpson rule on an odd number of equally spaced nodes (last axis)."""
    n = y.shape[-1]
    if n < 3 or n % 2 == 0:
        raise ValueError("composite Simpson needs an odd node count >= 3")
    return h / 3.0 * (
        y[..., 0] + y[..., -1] + 4.0 * y[..., 1:-1:2].sum(axis=-1) + 2.0 * y[..., 2:-1:2].sum(axis=-1)
    )
