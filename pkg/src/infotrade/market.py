"""Cash flow, discount curve and information-process synthesis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .paths import (
    OUTCOME_STREAM,
    TimeGrid,
    bridge_from_brownian,
    path_rng,
    simulate_brownian_pair,
    simulate_brownian_pairs,
)


@dataclass(frozen=True)
class CashFlowSpec:
    """Discrete payout ``X_T``: sorted distinct ``values`` with prior ``probabilities``."""

    values: tuple[float, ...]
    probabilities: tuple[float, ...]

    def __post_init__(self):
        x = np.asarray(self.values, dtype=float)
        p = np.asarray(self.probabilities, dtype=float)
        object.__setattr__(self, "values", tuple(float(v) for v in x))
        object.__setattr__(self, "probabilities", tuple(float(v) for v in p))
        if x.ndim != 1 or x.size < 1:
            raise ValueError("values must be a non-empty sequence")
        if p.shape != x.shape:
            raise ValueError("values and probabilities must have the same length")
        if not np.all(np.isfinite(x)):
            raise ValueError("values must be finite")
        if np.any(np.diff(x) <= 0):
            raise ValueError("values must be strictly increasing (distinct and sorted)")
        if np.any(p <= 0):
            raise ValueError("probabilities must all be positive")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities must sum to 1 (got {p.sum():.15g})")

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def x(self) -> np.ndarray:
        return np.array(self.values)

    @property
    def p(self) -> np.ndarray:
        return np.array(self.probabilities)

    @property
    def mean(self) -> float:
        return float(self.x @ self.p)

    @property
    def prior_entropy(self) -> float:
        """``H_0 = -sum p ln p`` in nats."""
        p = self.p
        return float(-(p * np.log(p)).sum())


@dataclass(frozen=True)
class DiscountCurve:
    """Deterministic default-free curve.

    Either a constant short ``rate`` or a table of zero-coupon prices ``P_0t``
    at ``times`` (log-linear interpolation, flat forward beyond the last knot).
    """

    rate: float | None = None
    times: tuple[float, ...] | None = None
    prices: tuple[float, ...] | None = None

    def __post_init__(self):
        if (self.rate is None) == (self.times is None):
            raise ValueError("give either a constant rate or a (times, prices) table")
        if self.times is not None:
            t = np.asarray(self.times, dtype=float)
            P = np.asarray(self.prices, dtype=float)
            if t.shape != P.shape or t.size < 1:
                raise ValueError("times and prices must be non-empty and of equal length")
            if np.any(np.diff(t) <= 0) or t[0] < 0:
                raise ValueError("times must be nonnegative and strictly increasing")
            if np.any(P <= 0) or np.any(np.diff(P) > 0):
                raise ValueError("zero-coupon prices must be positive and nonincreasing")
            if t[0] == 0 and P[0] != 1.0:
                raise ValueError("P_00 must equal 1")
            if t[0] > 0:
                t = np.concatenate([[0.0], t])
                P = np.concatenate([[1.0], P])
            object.__setattr__(self, "times", tuple(t))
            object.__setattr__(self, "prices", tuple(P))

    @classmethod
    def flat(cls, rate: float) -> "DiscountCurve":
        return cls(rate=float(rate))

    def zero_price(self, t):
        """``P_0t``."""
        t = np.asarray(t, dtype=float)
        if self.rate is not None:
            out = np.exp(-self.rate * t)
        else:
            knots = np.asarray(self.times)
            logP = np.log(self.prices)
            out = np.exp(np.interp(t, knots, logP))
            beyond = t > knots[-1]
            if np.any(beyond) and knots.size > 1:
                fwd = (logP[-1] - logP[-2]) / (knots[-1] - knots[-2])
                out = np.where(beyond, np.exp(logP[-1] + fwd * (t - knots[-1])), out)
        return float(out) if out.ndim == 0 else out

    def short_rate(self, t):
        """``r_t = -d ln P_0t / dt`` (piecewise constant for tables)."""
        if self.rate is not None:
            return self.rate + 0.0 * np.asarray(t, dtype=float)
        knots = np.asarray(self.times)
        logP = np.log(self.prices)
        if knots.size == 1:
            return 0.0 * np.asarray(t, dtype=float)
        fwd = -np.diff(logP) / np.diff(knots)
        seg = np.clip(np.searchsorted(knots, t, side="right") - 1, 0, fwd.size - 1)
        return fwd[seg]


def discount_factor(curve: DiscountCurve, t, T: float):
    """Forward discount factor ``P_tT = P_0T / P_0t``."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr > T) or np.any(t_arr < 0):
        raise ValueError("discount_factor requires 0 <= t <= T")
    if curve.rate is not None:
        out = np.exp(-curve.rate * (T - t_arr))
    else:
        out = curve.zero_price(T) / curve.zero_price(t_arr)
    out = np.where(t_arr == T, 1.0, out)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class InfoFlowParams:
    """Rate ``sigma`` at which the market information process reveals ``X_T``."""

    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


def sample_outcome(spec: CashFlowSpec, seed: int, path_index: int = 0) -> tuple[int, float]:
    """Draw ``X_T`` from the prior; deterministic in ``(seed, path_index)``."""
    if spec.n == 1:
        return 0, spec.values[0]
    u = path_rng(seed, path_index, OUTCOME_STREAM).random()
    k = _inverse_cdf(spec, u)
    return int(k), spec.values[int(k)]


def sample_outcomes(spec: CashFlowSpec, seed: int, path_indices) -> np.ndarray:
    """Outcome indices for many paths; entry ``j`` equals ``sample_outcome(spec, seed, path_indices[j])[0]``."""
    idx = np.asarray(path_indices, dtype=np.int64)
    if spec.n == 1:
        return np.zeros(idx.size, dtype=np.int64)
    u = np.array([path_rng(seed, i, OUTCOME_STREAM).random() for i in idx])
    return _inverse_cdf(spec, u)


def _inverse_cdf(spec, u):
    cdf = np.cumsum(spec.p)
    return np.minimum(np.searchsorted(cdf, u, side="right"), spec.n - 1)


@dataclass(frozen=True)
class PathBundle:
    """One simulated realisation of both information processes."""

    grid: TimeGrid
    outcome_index: int
    outcome: float
    xi: np.ndarray
    xi_prime: np.ndarray
    beta: np.ndarray
    beta_prime: np.ndarray
    sigma: float
    sigma_prime: float
    seed: int
    path_index: int = 0


def synthesize_paths(
    spec: CashFlowSpec,
    sigma: float,
    informed,
    grid: TimeGrid,
    seed: int,
    path_index: int = 0,
) -> PathBundle:
    """Sample ``X_T`` and build ``xi = sigma t X + beta`` and ``xi' = sigma' t X + beta'``.

    ``informed`` is an :class:`~infotrade.informed.InformedParams` (or ``None`` for
    an uncorrelated, signal-free second source).
    """
    sigma_prime, rho = (0.0, 0.0) if informed is None else (informed.sigma_prime, informed.rho)
    k, xk = sample_outcome(spec, seed, path_index)
    B, Bp = simulate_brownian_pair(grid, rho, seed, path_index)
    beta = bridge_from_brownian(B, grid)
    beta_prime = bridge_from_brownian(Bp, grid)
    t = grid.times
    return PathBundle(
        grid=grid,
        outcome_index=k,
        outcome=xk,
        xi=sigma * t * xk + beta,
        xi_prime=sigma_prime * t * xk + beta_prime,
        beta=beta,
        beta_prime=beta_prime,
        sigma=float(sigma),
        sigma_prime=float(sigma_prime),
        seed=int(seed),
        path_index=int(path_index),
    )


@dataclass(frozen=True)
class PathBatch:
    """Stacked realisations for Monte Carlo: arrays of shape ``(m, steps + 1)``."""

    grid: TimeGrid
    path_indices: np.ndarray
    outcome_index: np.ndarray
    outcome: np.ndarray
    xi: np.ndarray
    xi_prime: np.ndarray
    beta: np.ndarray
    beta_prime: np.ndarray


def synthesize_batch(spec, sigma, informed, grid, seed, path_indices) -> PathBatch:
    """Batch form of :func:`synthesize_paths`; row ``j`` matches path ``path_indices[j]`` exactly."""
    sigma_prime, rho = (0.0, 0.0) if informed is None else (informed.sigma_prime, informed.rho)
    idx = np.asarray(path_indices, dtype=np.int64)
    k = sample_outcomes(spec, seed, idx)
    xk = spec.x[k][:, None]
    B, Bp = simulate_brownian_pairs(grid, rho, seed, idx)
    beta = bridge_from_brownian(B, grid)
    beta_prime = bridge_from_brownian(Bp, grid)
    t = grid.times
    return PathBatch(
        grid=grid,
        path_indices=idx,
        outcome_index=k,
        outcome=xk[:, 0],
        xi=sigma * t * xk + beta,
        xi_prime=sigma_prime * t * xk + beta_prime,
        beta=beta,
        beta_prime=beta_prime,
    )
