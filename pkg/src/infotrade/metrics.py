"""Entropies, mutual information and the informed trader's information advantage.

All quantities are in nats. Densities of the information value ``xi_t`` are
Gaussian mixtures (component ``i`` has mean ``sigma x_i t`` and the bridge
variance), integrated with composite Simpson on a truncated support.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._numerics import log_normalizer, shannon_entropy, simpson
from .filter import conditional_variance, posterior_probs, price_function_derivative
from .informed import informed_posterior
from .market import CashFlowSpec
from .montecarlo import MCConfig, batches, mean_se
from .paths import TimeGrid, bridge_variance

__all__ = [
    "QuadratureConfig",
    "InfoReport",
    "joint_density",
    "mixture_entropy",
    "bridge_entropy",
    "mutual_information",
    "mutual_information_direct",
    "shannon_entropy",
    "expected_entropy",
    "cumulative_volatility_check",
    "price_entropy",
    "price_entropy_correction",
    "conditional_price_entropy",
    "delta_J",
    "write_info_csv",
]

ROUTE_TOLERANCE = 1e-6


@dataclass(frozen=True)
class QuadratureConfig:
    half_width: float = 10.0
    nodes: int = 2001
    rule: str = "simpson"

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")
        if self.nodes < 3 or self.nodes % 2 == 0:
            raise ValueError("nodes must be odd and >= 3")
        if self.rule != "simpson":
            raise ValueError(f"unsupported quadrature rule {self.rule!r}")


DEFAULT_QUAD = QuadratureConfig()


def _check_open(t, T):
    if not 0 < t < T:
        raise ValueError(f"t must lie strictly inside (0, {T}), got {t}")


def joint_density(x, i: int, t: float, spec: CashFlowSpec, sigma: float, T: float):
    """``p_i * N(x; sigma x_i t, t (T - t)/T)``: density of ``(xi_t, X_T = x_i)``."""
    _check_open(t, T)
    v = bridge_variance(t, T)
    x = np.asarray(x, dtype=float)
    return spec.p[i] * np.exp(-0.5 * (x - sigma * spec.x[i] * t) ** 2 / v) / np.sqrt(2 * np.pi * v)


def _component_logpdf(x, t, spec, sigma, T):
    """``log(p_i N_i(x))``, shape ``x.shape + (n,)``."""
    v = bridge_variance(t, T)
    means = sigma * spec.x * t
    return np.log(spec.p) - 0.5 * (x[..., None] - means) ** 2 / v - 0.5 * np.log(2 * np.pi * v)


def _support(t, spec, sigma, T, quad):
    sd = np.sqrt(bridge_variance(t, T))
    lo = sigma * t * spec.x.min() - quad.half_width * sd
    hi = sigma * t * spec.x.max() + quad.half_width * sd
    x = np.linspace(lo, hi, quad.nodes)
    return x, x[1] - x[0]


def _means_coincide(t, spec, sigma):
    return spec.n == 1 or sigma * t * (spec.x.max() - spec.x.min()) == 0


def bridge_entropy(t: float, T: float) -> float:
    """Differential entropy of the bridge at ``t``: ``0.5 ln(2 pi e t (T-t)/T)``."""
    _check_open(t, T)
    return 0.5 * float(np.log(2 * np.pi * np.e * bridge_variance(t, T)))


def mixture_entropy(t, spec, sigma, T, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """``H(xi_t) = -int rho ln rho`` for the mixture density of ``xi_t``."""
    _check_open(t, T)
    if _means_coincide(t, spec, sigma):
        return bridge_entropy(t, T)
    x, h = _support(t, spec, sigma, T, quad)
    log_rho = log_normalizer(_component_logpdf(x, t, spec, sigma, T))
    return float(-simpson(np.exp(log_rho) * log_rho, h))


def mutual_information_direct(t, spec, sigma, T, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """``J`` as the sum over outcomes of the joint-density integral of ``ln(rho_joint / (rho_xi p_i))``."""
    _check_open(t, T)
    if _means_coincide(t, spec, sigma):
        return 0.0
    x, h = _support(t, spec, sigma, T, quad)
    logc = _component_logpdf(x, t, spec, sigma, T)
    log_ratio = logc - log_normalizer(logc)[..., None] - np.log(spec.p)
    return float(simpson((np.exp(logc) * log_ratio).sum(axis=-1), h))


def mutual_information(t, spec, sigma, T, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """``J(xi_t, X_T) = H(xi_t) - H(beta_tT)``.

    The direct joint-density route is evaluated alongside; a disagreement
    above ``ROUTE_TOLERANCE`` triggers a ``RuntimeWarning``.
    """
    j = mixture_entropy(t, spec, sigma, T, quad) - bridge_entropy(t, T)
    direct = mutual_information_direct(t, spec, sigma, T, quad)
    if abs(j - direct) > ROUTE_TOLERANCE:
        warnings.warn(
            f"mutual information routes disagree at t={t}: {j} vs {direct}", RuntimeWarning, stacklevel=2
        )
    return j


def _snap(times, grid: TimeGrid):
    times = np.atleast_1d(np.asarray(times, dtype=float))
    idx = np.array([grid.index_of(t) for t in times])
    if np.any(np.abs(grid.times[idx] - times) > 1e-9 * grid.horizon):
        raise ValueError("Monte Carlo times must be grid points")
    if np.any(idx >= grid.n_eval):
        raise ValueError("Monte Carlo times must not exceed T - eps")
    return idx


def _entropy_samples(spec, sigma, informed, grid, mc, idx):
    """Per-path market (and, when ``informed`` is given, informed) entropies at grid indices."""
    T = grid.horizon
    t = grid.times[idx]
    H, Ht = [], []
    for b in batches(spec, sigma, informed, grid, mc):
        H.append(shannon_entropy(posterior_probs(b.xi[:, idx], t, spec, sigma, T)))
        if informed is not None:
            pi_t = informed_posterior(b.xi[:, idx], b.xi_prime[:, idx], t, spec, sigma, informed, T)
            Ht.append(shannon_entropy(pi_t))
    return np.concatenate(H), (np.concatenate(Ht) if informed is not None else None)


def expected_entropy(times, spec, sigma, grid: TimeGrid, mc: MCConfig):
    """Monte Carlo ``E[H_t]`` at grid times; returns ``(mean, se)`` arrays."""
    idx = _snap(times, grid)
    H, _ = _entropy_samples(spec, sigma, None, grid, mc, idx)
    return mean_se(H)


def cumulative_volatility_check(spec, sigma, grid: TimeGrid, mc: MCConfig):
    """Monte Carlo ``0.5 E[int_0^{T-eps} sigma^2 T^2 / (T-s)^2 V_s ds]`` with ``(mean, se)``.

    Tends to ``H_0`` as the guard shrinks.
    """
    T = grid.horizon
    t = grid.eval_times
    weight = sigma**2 * T**2 / (T - t) ** 2
    vals = []
    for b in batches(spec, sigma, None, grid, mc):
        V = conditional_variance(posterior_probs(b.xi[:, : t.size], t, spec, sigma, T), spec)
        vals.append(0.5 * np.trapezoid(weight * V, t, axis=-1))
    m, se = mean_se(np.concatenate(vals))
    return float(m), float(se)


def price_entropy_correction(t, spec, sigma, T, P_tT, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """``int rho_xi(x) ln B'(t, x) dx``, the mean log-volatility of the price."""
    _check_open(t, T)
    if spec.n < 2:
        raise ValueError("price entropy needs at least two outcomes (B' vanishes otherwise)")
    x, h = _support(t, spec, sigma, T, quad)
    rho = np.exp(log_normalizer(_component_logpdf(x, t, spec, sigma, T)))
    with np.errstate(divide="ignore"):
        logd = np.log(price_function_derivative(t, x, spec, sigma, T, P_tT))
    # B' underflows only where rho is negligible
    integrand = np.where(rho > 0, rho * np.where(np.isfinite(logd), logd, 0.0), 0.0)
    return float(simpson(integrand, h))


def price_entropy(t, spec, sigma, T, P_tT, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """``H(B_tT) = H(xi_t) + int rho_xi ln B'``."""
    return mixture_entropy(t, spec, sigma, T, quad) + price_entropy_correction(t, spec, sigma, T, P_tT, quad)


def conditional_price_entropy(t, spec, sigma, T, P_tT, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """``H(B_tT | X_T)``: per-outcome transform of the Gaussian conditional law of ``xi_t``.

    Each outcome is integrated on its own support, independent of the mixture grid.
    """
    _check_open(t, T)
    if spec.n < 2:
        raise ValueError("price entropy needs at least two outcomes")
    sd = np.sqrt(bridge_variance(t, T))
    total = bridge_entropy(t, T)
    for i in range(spec.n):
        m = sigma * spec.x[i] * t
        x = np.linspace(m - quad.half_width * sd, m + quad.half_width * sd, quad.nodes)
        dens = np.exp(-0.5 * ((x - m) / sd) ** 2) / (np.sqrt(2 * np.pi) * sd)
        logd = np.log(price_function_derivative(t, x, spec, sigma, T, P_tT))
        total += spec.p[i] * float(simpson(dens * logd, x[1] - x[0]))
    return total


@dataclass(frozen=True)
class DeltaJEstimate:
    times: np.ndarray
    delta: np.ndarray
    se: np.ndarray
    market_entropy: np.ndarray
    market_se: np.ndarray
    informed_entropy: np.ndarray
    informed_se: np.ndarray


def delta_J(times, spec, sigma, informed, grid: TimeGrid, mc: MCConfig) -> DeltaJEstimate:
    """Paired-path estimate of ``E[H_t] - E[H~_t]`` at grid times.

    Both filters read the same simulated paths, so the standard error is that
    of the per-path entropy difference.
    """
    idx = _snap(times, grid)
    H, Ht = _entropy_samples(spec, sigma, informed, grid, mc, idx)
    d, d_se = mean_se(H - Ht)
    h, h_se = mean_se(H)
    ht, ht_se = mean_se(Ht)
    return DeltaJEstimate(grid.times[idx], d, d_se, h, h_se, ht, ht_se)


@dataclass
class InfoReport:
    """One row of information measures at time ``t``; missing estimates are ``None``."""

    t: float
    J: float
    H_xi: float
    H_bridge: float
    H0: float
    E_Ht: float | None = None
    se_E_Ht: float | None = None
    deltaJ: float | None = None
    se_deltaJ: float | None = None
    extra: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.J < -ROUTE_TOLERANCE:
            raise ValueError(f"mutual information must be nonnegative, got {self.J}")


INFO_COLUMNS = ["t", "J", "H_xi", "H_bridge", "H0", "E_Ht", "se_E_Ht", "deltaJ", "se_deltaJ"]


def info_report(t, spec, sigma, T, quad: QuadratureConfig = DEFAULT_QUAD) -> InfoReport:
    h_xi = mixture_entropy(t, spec, sigma, T, quad)
    h_b = bridge_entropy(t, T)
    return InfoReport(t=float(t), J=h_xi - h_b, H_xi=h_xi, H_bridge=h_b, H0=spec.prior_entropy)


def write_info_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(INFO_COLUMNS)
        for r in rows:
            w.writerow(["" if getattr(r, c) is None else repr(float(getattr(r, c))) for c in INFO_COLUMNS])
