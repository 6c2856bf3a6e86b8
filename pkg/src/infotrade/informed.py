"""The informed trader's two-source filter and its single effective-source form."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._numerics import normalize_log_weights
from .filter import (
    PosteriorPath,
    bond_price,
    innovations,
    posterior_from_pi,
)
from .market import CashFlowSpec, DiscountCurve
from .paths import TimeGrid


@dataclass(frozen=True)
class InformedParams:
    """Extra source ``xi' = sigma' t X + beta'`` with noise correlation ``rho``."""

    sigma_prime: float
    rho: float

    def __post_init__(self):
        if not self.sigma_prime >= 0:
            raise ValueError(f"sigma_prime must be nonnegative, got {self.sigma_prime}")
        if not -1.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in the open interval (-1, 1), got {self.rho}")


@dataclass(frozen=True)
class DerivedSignalParams:
    sigma1: float
    sigma2: float
    sigma3_sq: float
    varrho: float
    sigma_bar: float
    sigma_hat: float


def derived_params(sigma: float, informed: InformedParams) -> DerivedSignalParams:
    """Combination rates of the joint filter.

    ``sigma_hat**2 = sigma**2 + sigma_bar**2 >= sigma**2``, with equality
    exactly when ``sigma' = rho sigma``.
    """
    rho, sp = informed.rho, informed.sigma_prime
    if not -1.0 < rho < 1.0:
        raise ValueError("rho must lie in the open interval (-1, 1)")
    varrho = 1.0 - rho * rho
    sigma3_sq = sigma * sigma - 2.0 * rho * sigma * sp + sp * sp
    sigma_bar = (sp - rho * sigma) / np.sqrt(varrho)
    # sigma**2 + sigma_bar**2 is the same quantity as sigma3_sq / varrho but
    # cannot dip below sigma**2 through cancellation
    sigma_hat = float(np.sqrt(sigma * sigma + sigma_bar * sigma_bar))
    return DerivedSignalParams(
        sigma1=sigma - rho * sp,
        sigma2=sp - rho * sigma,
        sigma3_sq=sigma3_sq,
        varrho=varrho,
        sigma_bar=float(sigma_bar),
        sigma_hat=sigma_hat,
    )


def informed_log_weights(xi, xi_prime, t, spec: CashFlowSpec, sigma, informed, T):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t >= T):
        raise ValueError("the filter is defined for 0 <= t < T; use the terminal guard")
    d = derived_params(sigma, informed)
    xi, xi_prime, t = np.broadcast_arrays(np.asarray(xi, float), np.asarray(xi_prime, float), t)
    x = spec.x
    scale = (T / (d.varrho * (T - t)))[..., None]
    signal = (d.sigma1 * xi + d.sigma2 * xi_prime)[..., None]
    return np.log(spec.p) + scale * (x * signal - 0.5 * d.sigma3_sq * x**2 * t[..., None])


def informed_posterior(xi, xi_prime, t, spec: CashFlowSpec, sigma: float, informed: InformedParams, T: float):
    """``Q(X_T = x_i | xi_t, xi'_t)``, outcome axis last."""
    logw = informed_log_weights(xi, xi_prime, t, spec, sigma, informed, T)
    if spec.n == 1:
        return np.ones(logw.shape)
    return normalize_log_weights(logw)


def informed_price(pi_tilde, spec: CashFlowSpec, P_tT):
    return bond_price(pi_tilde, spec, P_tT)


def convergence_form_log_weights(beta, beta_prime, t, k, spec, sigma, informed, T):
    """Log weights relative to the realised outcome ``x_k``, written through the noises.

    With ``xi = sigma t x_k + beta`` and ``xi' = sigma' t x_k + beta'`` the
    joint-filter exponent for outcome ``i`` becomes
    ``T/(varrho (T-t)) * (w (sigma1 beta + sigma2 beta') - sigma3^2 w^2 t / 2)``
    with ``w = x_i - x_k``. When ``beta' = beta`` the noise coefficient is
    ``(1 - rho)(sigma + sigma')``.
    """
    d = derived_params(sigma, informed)
    w = spec.x - spec.x[k]
    beta, beta_prime, t = np.broadcast_arrays(np.asarray(beta, float), np.asarray(beta_prime, float), np.asarray(t, float))
    noise = (d.sigma1 * beta + d.sigma2 * beta_prime)[..., None]
    scale = (T / (d.varrho * (T - t)))[..., None]
    return np.log(spec.p) + scale * (w * noise - 0.5 * d.sigma3_sq * w**2 * t[..., None])


def effective_information_path(xi, xi_prime, sigma: float, informed: InformedParams):
    """Single process ``xi_hat = sigma_hat t X + beta_hat`` carrying the joint information.

    Returns ``(xi_hat, sigma_hat)``.
    """
    d = derived_params(sigma, informed)
    if d.sigma_hat == 0:
        raise ValueError("effective rate is zero; both sources carry no signal")
    xi_hat = (d.sigma1 * np.asarray(xi, float) + d.sigma2 * np.asarray(xi_prime, float)) / (d.varrho * d.sigma_hat)
    return xi_hat, d.sigma_hat


def informed_filter_path(xi, xi_prime, grid: TimeGrid, spec, sigma, informed, curve: DiscountCurve) -> PosteriorPath:
    """Informed valuation along a pair of information paths.

    The returned posterior carries ``sigma_hat`` as its rate, so innovations
    and Euler reconstruction of the informed valuation reuse the market
    routines unchanged.
    """
    K = grid.n_eval
    xi = np.asarray(xi, float)[..., :K]
    xi_prime = np.asarray(xi_prime, float)[..., :K]
    pi = informed_posterior(xi, xi_prime, grid.eval_times, spec, sigma, informed, grid.horizon)
    return posterior_from_pi(pi, grid, spec, derived_params(sigma, informed).sigma_hat, curve)


def informed_innovations(xi_hat, posterior_tilde: PosteriorPath) -> np.ndarray:
    """``Z_t = xi_hat + int xi_hat/(T-s) ds - sigma_hat T int Xtilde/(T-s) ds``."""
    K = posterior_tilde.times.size
    xi_hat = np.asarray(xi_hat, float)
    if xi_hat.shape[-1] < K:
        raise ValueError("effective path is shorter than the posterior grid")
    return innovations(xi_hat[..., :K], posterior_tilde.mean, posterior_tilde.times, posterior_tilde.sigma, posterior_tilde.horizon)


def decompose_extra_info(xi, xi_prime, sigma: float, informed: InformedParams):
    """Split the extra source into a part orthogonal to the market noise.

    Returns ``(xi_bar, sigma_bar)`` with ``xi' = rho xi + sqrt(1 - rho^2) xi_bar``.
    """
    rho = informed.rho
    root = np.sqrt(1.0 - rho * rho)
    xi_bar = (np.asarray(xi_prime, float) - rho * np.asarray(xi, float)) / root
    return xi_bar, derived_params(sigma, informed).sigma_bar


def pure_noise_component(xi, xi_bar, sigma: float, sigma_bar: float):
    """``delta = xi/sigma - xi_bar/sigma_bar``; carries no trace of ``X_T``."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if sigma_bar == 0:
        raise ValueError("sigma_bar is zero: the orthogonal source has no signal and delta is undefined")
    return np.asarray(xi, float) / sigma - np.asarray(xi_bar, float) / sigma_bar


def orthogonalized_rates(sigmas, noise_correlations) -> np.ndarray:
    """Signal rates after sequential Gram-Schmidt orthogonalisation of the noises.

    Source ``k`` has its noise projected off the (already orthonormalised)
    noises of sources ``0..k-1``; what remains is rescaled to unit variance,
    and the same linear map is applied to the signal rate.
    """
    s = np.asarray(sigmas, dtype=float)
    C = np.asarray(noise_correlations, dtype=float)
    n = s.size
    if C.shape != (n, n):
        raise ValueError(f"correlation matrix must be {n}x{n}")
    if not np.allclose(C, C.T, atol=1e-12) or not np.allclose(np.diag(C), 1.0, atol=1e-12):
        raise ValueError("correlation matrix must be symmetric with unit diagonal")
    # L[k] holds the coefficients of noise k on the orthonormal basis (C = L L^T)
    L = np.zeros((n, n))
    bar = np.zeros(n)
    for k in range(n):
        coef = np.zeros(n)
        for j in range(k):
            coef[j] = (C[k, j] - coef[:j] @ L[j, :j]) / L[j, j]
        resid = C[k, k] - coef[:k] @ coef[:k]
        if resid <= 1e-14:
            raise ValueError("correlation matrix is not positive definite")
        coef[k] = np.sqrt(resid)
        L[k] = coef
        bar[k] = (s[k] - coef[:k] @ bar[:k]) / coef[k]
    return bar


def multi_source_effective_sigma(sigmas, noise_correlations) -> float:
    """Effective rate ``(sum sigma_bar_k^2)^(1/2)`` of several correlated sources.

    Equal to ``sqrt(s^T C^{-1} s)`` for rate vector ``s`` and noise correlation ``C``.
    """
    bar = orthogonalized_rates(sigmas, noise_correlations)
    return float(np.sqrt(bar @ bar))
