"""The market filter: conditional probabilities, price, variance and innovations."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ._numerics import cumulative_trapezoid, normalize_log_weights, shannon_entropy
from .market import CashFlowSpec, DiscountCurve, discount_factor
from .paths import TimeGrid


def _check_time(t, T):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t >= T):
        raise ValueError("the filter is defined for 0 <= t < T; use the terminal guard")
    return t


def log_weights(xi, t, spec: CashFlowSpec, sigma: float, T: float) -> np.ndarray:
    """Unnormalised log posterior weights, shape ``broadcast(xi, t) + (n,)``."""
    t = _check_time(t, T)
    xi = np.asarray(xi, dtype=float)
    xi, t = np.broadcast_arrays(xi, t)
    x = spec.x
    scale = (T / (T - t))[..., None]
    expo = sigma * x * xi[..., None] - 0.5 * sigma**2 * x**2 * t[..., None]
    return np.log(spec.p) + scale * expo


def posterior_probs(xi, t, spec: CashFlowSpec, sigma: float, T: float) -> np.ndarray:
    """Conditional probabilities ``pi_i = Q(X_T = x_i | xi_t)``.

    Broadcasts over ``xi`` and ``t``; the outcome axis is last.
    """
    if spec.n == 1:
        shape = np.broadcast_shapes(np.shape(xi), np.shape(_check_time(t, T)))
        return np.ones(shape + (1,))
    return normalize_log_weights(log_weights(xi, t, spec, sigma, T))


def conditional_mean(pi, spec: CashFlowSpec) -> np.ndarray:
    return np.asarray(pi) @ spec.x


def bond_price(pi, spec: CashFlowSpec, P_tT) -> np.ndarray:
    """``B_tT = P_tT * sum x_i pi_i``."""
    return P_tT * conditional_mean(pi, spec)


def conditional_variance(pi, spec: CashFlowSpec) -> np.ndarray:
    """``V_tT = sum (x_i - Xhat)^2 pi_i``; never negative."""
    pi = np.asarray(pi)
    xhat = pi @ spec.x
    dev = spec.x - np.asarray(xhat)[..., None]
    return np.maximum((dev**2 * pi).sum(axis=-1), 0.0)


def price_function(t, x, spec, sigma, T, P_tT):
    """Price as a function of the information value, ``B(t, x)``."""
    return bond_price(posterior_probs(x, t, spec, sigma, T), spec, P_tT)


def price_function_derivative(t, x, spec, sigma, T, P_tT):
    """``dB(t, x)/dx = sigma T P_tT / (T - t) * V``; strictly positive when n >= 2."""
    t = _check_time(t, T)
    pi = posterior_probs(x, t, spec, sigma, T)
    return sigma * T * P_tT / (T - t) * conditional_variance(pi, spec)


@dataclass(frozen=True)
class PosteriorPath:
    """Filter output on the evaluable part of a grid (``t <= T - eps``).

    Arrays have the time axis last-but-one for ``pi`` (shape ``(..., K, n)``)
    and last for the scalar series (shape ``(..., K)``).
    """

    times: np.ndarray
    pi: np.ndarray
    price: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    entropy: np.ndarray
    discount: np.ndarray
    sigma: float
    horizon: float
    values: np.ndarray | None = None

    def to_csv(self, path, source: str | None = None) -> None:
        """One row per grid time: ``t, pi_1..pi_n, B, X_hat, V, H`` (plus ``source``)."""
        if self.price.ndim != 1:
            raise ValueError("only single-path posteriors serialise to CSV")
        n = self.pi.shape[-1]
        header = ["t", *[f"pi_{i + 1}" for i in range(n)], "B", "X_hat", "V", "H"]
        if source is not None:
            header.append("source")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for k, t in enumerate(self.times):
                row = [repr(float(t)), *[repr(float(v)) for v in self.pi[k]]]
                row += [repr(float(a[k])) for a in (self.price, self.mean, self.variance, self.entropy)]
                if source is not None:
                    row.append(source)
                w.writerow(row)


def posterior_from_pi(pi, grid: TimeGrid, spec, sigma, curve: DiscountCurve) -> PosteriorPath:
    times = grid.eval_times
    P = discount_factor(curve, times, grid.horizon)
    mean = conditional_mean(pi, spec)
    return PosteriorPath(
        times=times,
        pi=pi,
        price=P * mean,
        mean=mean,
        variance=conditional_variance(pi, spec),
        entropy=shannon_entropy(pi),
        discount=P,
        sigma=float(sigma),
        horizon=grid.horizon,
        values=spec.x,
    )


def filter_path(xi, grid: TimeGrid, spec: CashFlowSpec, sigma: float, curve: DiscountCurve) -> PosteriorPath:
    """Run the market filter along ``xi`` (shape ``(..., steps + 1)``) up to ``T - eps``."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != grid.steps + 1:
        raise ValueError("information path does not match the grid")
    K = grid.n_eval
    pi = posterior_probs(xi[..., :K], grid.eval_times, spec, sigma, grid.horizon)
    return posterior_from_pi(pi, grid, spec, sigma, curve)


def innovations(xi, xhat, times, sigma: float, T: float) -> np.ndarray:
    """``W_t = xi_t + int xi/(T-s) ds - sigma T int Xhat/(T-s) ds`` with trapezoid integrals."""
    xi = np.asarray(xi, dtype=float)
    xhat = np.asarray(xhat, dtype=float)
    if xi.shape[-1] != times.size or xhat.shape[-1] != times.size:
        raise ValueError("paths and posterior live on different grids")
    decay = 1.0 / (T - times)
    return xi + cumulative_trapezoid(xi * decay, times) - sigma * T * cumulative_trapezoid(
        xhat * decay, times
    )


def innovations_path(bundle, posterior: PosteriorPath) -> np.ndarray:
    """Innovations Brownian motion of the market filter on the posterior's times."""
    K = posterior.times.size
    if bundle.grid.horizon != posterior.horizon or not np.array_equal(bundle.grid.times[:K], posterior.times):
        raise ValueError("bundle and posterior were computed on different grids")
    return innovations(bundle.xi[..., :K], posterior.mean, posterior.times, posterior.sigma, posterior.horizon)


def euler_price_path(posterior: PosteriorPath, dW, curve: DiscountCurve, scheme: str = "euler") -> np.ndarray:
    """Reconstruct the price from the SDE ``dB = r B dt + (sigma T/(T-t)) P V dW``.

    ``dW`` are innovation increments on the posterior's time steps. The
    volatility uses ``posterior.sigma``, so the same routine integrates the
    informed valuation when handed an effective-rate posterior.

    ``scheme="milstein"`` adds ``0.5 P k^2 M3 (dW^2 - dt)`` with ``k = sigma T/(T-t)``
    and ``M3`` the third central posterior moment, the derivative of the
    volatility along the information value.
    """
    if scheme not in ("euler", "milstein"):
        raise ValueError(f"unknown scheme {scheme!r}")
    t = posterior.times
    T = posterior.horizon
    dt = np.diff(t)
    dW = np.asarray(dW, dtype=float)
    r = np.asarray(curve.short_rate(t[:-1]), dtype=float)
    k = posterior.sigma * T / (T - t[:-1])
    P = posterior.discount[:-1]
    step = k * P * posterior.variance[..., :-1] * dW
    if scheme == "milstein":
        if posterior.values is None:
            raise ValueError("the Milstein step needs the payout values on the posterior")
        dev = posterior.values - posterior.mean[..., None]
        m3 = (dev**3 * posterior.pi).sum(axis=-1)[..., :-1]
        step = step + 0.5 * P * k**2 * m3 * (dW**2 - dt)
    out = np.empty(posterior.price.shape)
    out[..., 0] = posterior.price[..., 0]
    for j in range(t.size - 1):
        out[..., j + 1] = out[..., j] * (1.0 + r[j] * dt[j]) + step[..., j]
    return out
