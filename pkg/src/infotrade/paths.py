"""Seeded Brownian motions and Brownian bridges on a uniform time grid.

Every path is keyed by ``(seed, path_index)``: its normals come from a Philox
counter-based generator whose key is derived from that pair, so any subset of
paths can be regenerated independently and in any order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

# stream identifiers inside one path's key
NOISE_STREAM = 0
OUTCOME_STREAM = 1


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_k = k T / N`` on ``[0, T]``.

    ``guard`` is the terminal cutoff: filter quantities carrying the factor
    ``T / (T - t)`` are only evaluated for ``t <= T - guard``. It defaults to
    one grid step.
    """

    horizon: float
    steps: int
    guard: float | None = None

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if int(self.steps) != self.steps or self.steps < 2:
            raise ValueError(f"steps must be an integer >= 2, got {self.steps}")
        if self.guard is not None and not 0 < self.guard < self.horizon:
            raise ValueError(f"guard must lie in (0, horizon), got {self.guard}")

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    @property
    def eps(self) -> float:
        return self.dt if self.guard is None else float(self.guard)

    @cached_property
    def fractions(self) -> np.ndarray:
        # k / N, so the last entry is exactly 1.0
        return np.arange(self.steps + 1) / self.steps

    @cached_property
    def times(self) -> np.ndarray:
        return self.horizon * self.fractions

    @cached_property
    def n_eval(self) -> int:
        """Number of leading grid points with ``t <= T - eps``."""
        cutoff = self.horizon - self.eps
        return int(np.searchsorted(self.times, cutoff * (1 + 1e-12), side="right"))

    @property
    def eval_times(self) -> np.ndarray:
        return self.times[: self.n_eval]

    def index_of(self, t: float) -> int:
        """Index of the grid point closest to ``t``."""
        return int(np.argmin(np.abs(self.times - t)))


def path_rng(seed: int, path_index: int = 0, stream: int = NOISE_STREAM) -> np.random.Generator:
    """Generator for one (seed, path, stream) key; independent of every other key."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(path_index), int(stream)))
    return np.random.Generator(np.random.Philox(ss))


def _check_rho(rho: float) -> None:
    if not -1.0 < rho < 1.0:
        raise ValueError(f"correlation must lie in the open interval (-1, 1), got {rho}")


def simulate_brownian_pair(grid: TimeGrid, rho: float, seed: int, path_index: int = 0):
    """Two Brownian paths on ``grid`` whose increments have correlation ``rho``.

    Returns arrays ``(B, B_prime)`` of length ``steps + 1`` starting at 0.
    """
    _check_rho(rho)
    z = path_rng(seed, path_index).standard_normal((2, grid.steps))
    return _correlated_paths(z[0], z[1], rho, grid.dt)


def simulate_brownian_pairs(grid: TimeGrid, rho: float, seed: int, path_indices):
    """Stacked version of :func:`simulate_brownian_pair`, shape ``(m, steps + 1)`` each.

    Row ``j`` is bit-identical to ``simulate_brownian_pair(grid, rho, seed, path_indices[j])``.
    """
    _check_rho(rho)
    idx = np.asarray(path_indices, dtype=np.int64)
    z = np.empty((idx.size, 2, grid.steps))
    for j, i in enumerate(idx):
        z[j] = path_rng(seed, i).standard_normal((2, grid.steps))
    return _correlated_paths(z[:, 0], z[:, 1], rho, grid.dt)


def _correlated_paths(z, z_prime, rho, dt):
    sq = np.sqrt(dt)
    dB = sq * z
    dB_prime = sq * (rho * z + np.sqrt(1.0 - rho * rho) * z_prime)
    pad = [(0, 0)] * (dB.ndim - 1) + [(1, 0)]
    B = np.pad(np.cumsum(dB, axis=-1), pad)
    B_prime = np.pad(np.cumsum(dB_prime, axis=-1), pad)
    return B, B_prime


def bridge_from_brownian(path, grid: TimeGrid) -> np.ndarray:
    """Pin a Brownian path at ``T``: ``beta(t) = B(t) - (t/T) B(T)``."""
    path = np.asarray(path, dtype=float)
    if path.shape[-1] != grid.steps + 1:
        raise ValueError(
            f"path has {path.shape[-1]} points, grid expects {grid.steps + 1}"
        )
    return path - grid.fractions * path[..., -1:]


def bridge_variance(t, T):
    """Variance ``t (T - t) / T`` of a standard Brownian bridge on ``[0, T]``."""
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    t = np.asarray(t, dtype=float)
    if np.any((t < 0) | (t > T)):
        raise ValueError(f"t must lie in [0, {T}]")
    v = t * (T - t) / T
    return float(v) if v.ndim == 0 else v
