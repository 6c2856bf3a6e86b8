"""Chunked, order-independent Monte Carlo over seeded paths."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .market import CashFlowSpec, PathBatch, synthesize_batch
from .paths import TimeGrid


@dataclass(frozen=True)
class MCConfig:
    """Path count and base seed; path ``i`` is always generated from key ``(seed, i)``."""

    paths: int = 2000
    seed: int = 0
    chunk: int = 500

    def __post_init__(self):
        if int(self.paths) != self.paths or self.paths < 1:
            raise ValueError(f"paths must be a positive integer, got {self.paths}")
        if self.chunk < 1:
            raise ValueError("chunk must be positive")


def batches(spec: CashFlowSpec, sigma: float, informed, grid: TimeGrid, mc: MCConfig) -> Iterator[PathBatch]:
    """Yield path batches in index order; chunking never changes any path."""
    for start in range(0, mc.paths, mc.chunk):
        idx = np.arange(start, min(start + mc.chunk, mc.paths))
        yield synthesize_batch(spec, sigma, informed, grid, mc.seed, idx)


def mean_se(samples, axis=0):
    """Sample mean and its standard error along ``axis``."""
    samples = np.asarray(samples, dtype=float)
    m = samples.shape[axis]
    mean = samples.mean(axis=axis)
    if m < 2:
        return mean, np.full_like(mean, np.nan)
    return mean, samples.std(axis=axis, ddof=1) / np.sqrt(m)
