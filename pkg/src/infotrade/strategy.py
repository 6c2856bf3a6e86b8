"""Threshold purchase strategy for market and informed traders, and its backtest."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .filter import conditional_mean, posterior_probs
from .informed import informed_posterior
from .market import CashFlowSpec, DiscountCurve, discount_factor
from .montecarlo import MCConfig, batches, mean_se
from .paths import TimeGrid


@dataclass(frozen=True)
class StrategyConfig:
    """Buy iff valuation exceeds ``threshold * P_tT``; hold to maturity.

    ``decision_times`` must be grid points in ``[0, T - eps]``.
    """

    threshold: float
    decision_times: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "decision_times", tuple(float(t) for t in self.decision_times))
        if not self.decision_times:
            raise ValueError("at least one decision time is required")

    def check_against(self, spec: CashFlowSpec) -> None:
        if not spec.x.min() <= self.threshold <= spec.x.max():
            warnings.warn(
                f"threshold {self.threshold} lies outside the payout range; the strategy is degenerate",
                UserWarning,
                stacklevel=2,
            )


def market_terminal_pnl(B, P, K, X):
    """``1{B > K P} (X - B/P)``: bond bought at ``t`` with borrowed money, held to ``T``."""
    B, P, X = np.asarray(B, float), np.asarray(P, float), np.asarray(X, float)
    return np.where(B > K * P, X - B / P, 0.0)


def informed_terminal_pnl(B_tilde, B, P, K, X):
    """Same trade as the market's but triggered by the informed valuation ``B_tilde``."""
    B_tilde, B, P, X = (np.asarray(a, float) for a in (B_tilde, B, P, X))
    return np.where(B_tilde > K * P, X - B / P, 0.0)


def conditional_excess(B, B_tilde, P, K):
    """Expected excess P&L given the informed trader's information.

    ``(1{B~ > KP} - 1{B > KP}) (B~ - B) / P``; nonnegative for every input with ``P > 0``.
    """
    B, B_tilde, P = np.asarray(B, float), np.asarray(B_tilde, float), np.asarray(P, float)
    ind = (B_tilde > K * P).astype(float) - (B > K * P).astype(float)
    return ind * (B_tilde - B) / P


PNL_COLUMNS = ["t", "pnl_market", "pnl_informed", "diff", "se", "n_paths"]


@dataclass(frozen=True)
class PnLReport:
    """Totals over paths per decision time; ``se`` is the standard error of ``diff``."""

    times: np.ndarray
    pnl_market: np.ndarray
    pnl_informed: np.ndarray
    diff: np.ndarray
    se: np.ndarray
    n_paths: int
    seed: int
    excess_mean: np.ndarray
    excess_se: np.ndarray
    excess_min: float
    excess_nonnegative_fraction: float

    @property
    def burn_in(self) -> float | None:
        """Earliest decision time whose difference exceeds three standard errors."""
        hits = np.nonzero(self.diff > 3 * self.se)[0]
        return float(self.times[hits[0]]) if hits.size else None

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(PNL_COLUMNS)
            for k, t in enumerate(self.times):
                w.writerow(
                    [
                        repr(float(t)),
                        repr(float(self.pnl_market[k])),
                        repr(float(self.pnl_informed[k])),
                        repr(float(self.diff[k])),
                        repr(float(self.se[k])),
                        self.n_paths,
                    ]
                )


def pnl_backtest(
    spec: CashFlowSpec,
    sigma: float,
    informed,
    curve: DiscountCurve,
    grid: TimeGrid,
    strategy: StrategyConfig,
    mc: MCConfig,
) -> PnLReport:
    """Total terminal P&L of both traders at each decision time over one shared path set.

    Every decision time reuses the same paths, and each path feeds both
    traders. ``diff`` is the informed total minus the market total; its
    standard error is ``paths * se(per-path difference)``.
    """
    strategy.check_against(spec)
    T = grid.horizon
    idx = np.array([grid.index_of(t) for t in strategy.decision_times])
    if np.any(np.abs(grid.times[idx] - np.array(strategy.decision_times)) > 1e-9 * T) or np.any(idx >= grid.n_eval):
        raise ValueError("decision times must be grid points within [0, T - eps]")
    t = grid.times[idx]
    P = discount_factor(curve, t, T)
    K = strategy.threshold
    mkt, inf, exc = [], [], []
    for b in batches(spec, sigma, informed, grid, mc):
        xi = b.xi[:, idx]
        B = P * conditional_mean(posterior_probs(xi, t, spec, sigma, T), spec)
        if informed is None:
            Bt = B
        else:
            Bt = P * conditional_mean(informed_posterior(xi, b.xi_prime[:, idx], t, spec, sigma, informed, T), spec)
        X = b.outcome[:, None]
        mkt.append(market_terminal_pnl(B, P, K, X))
        inf.append(informed_terminal_pnl(Bt, B, P, K, X))
        exc.append(conditional_excess(B, Bt, P, K))
    mkt, inf, exc = np.concatenate(mkt), np.concatenate(inf), np.concatenate(exc)
    n = mc.paths
    _, d_se = mean_se(inf - mkt)
    e_mean, e_se = mean_se(exc)
    return PnLReport(
        times=t,
        pnl_market=mkt.sum(axis=0),
        pnl_informed=inf.sum(axis=0),
        diff=(inf - mkt).sum(axis=0),
        se=n * d_se,
        n_paths=n,
        seed=mc.seed,
        excess_mean=e_mean,
        excess_se=e_se,
        excess_min=float(exc.min()),
        excess_nonnegative_fraction=float(np.mean(exc >= 0)),
    )
