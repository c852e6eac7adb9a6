"""BI-AWGN channel with BPSK (0 -> +1), at sample level and as L-densities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .decoder import LLR_CAP
from .density import GridSpec, LDensity, delta_inf, delta_zero
from .graph import TannerGraph


@dataclass(frozen=True)
class ChannelSpec:
    ebn0_db: float
    rate: float

    def __post_init__(self):
        if not 0.0 < self.rate < 1.0:
            raise ValueError("rate must lie in (0, 1)")

    @property
    def sigma(self) -> float:
        return float(np.sqrt(1.0 / (2.0 * self.rate * 10.0 ** (self.ebn0_db / 10.0))))

    @property
    def llr_mean(self) -> float:
        """Mean 2 / sigma^2 of the channel LLR given bit 0."""
        s = self.sigma
        return np.inf if s == 0.0 else 2.0 / s ** 2

    @classmethod
    def from_sigma(cls, sigma: float, rate: float) -> "ChannelSpec":
        ebn0 = 1.0 / (2.0 * rate * sigma ** 2)
        return cls(float(10.0 * np.log10(ebn0)), rate)


def sample_llr(spec: ChannelSpec, graph: TannerGraph, rng: np.random.Generator,
               trials: int | None = None) -> np.ndarray:
    """Channel LLRs ``2 y / sigma^2`` for the all-zero word; punctured positions get 0.

    Returns shape ``(n_vars,)`` or ``(trials, n_vars)``.
    """
    sigma = spec.sigma
    shape = (graph.n_vars,) if trials is None else (trials, graph.n_vars)
    if sigma == 0.0:
        llr = np.full(shape, LLR_CAP)
    else:
        y = 1.0 + sigma * rng.standard_normal(shape)
        llr = 2.0 * y / sigma ** 2
    if graph.punctured:
        llr[..., graph.punctured_mask()] = 0.0
    return llr


def gaussian_ldensity(mean: float, grid: GridSpec) -> LDensity:
    """Quantize N(mean, 2 * mean) onto ``grid`` (bin integrals, tails saturated)."""
    if mean <= 0:
        return delta_zero(grid)
    if not np.isfinite(mean):
        return delta_inf(grid)
    std = np.sqrt(2.0 * mean)
    pts = grid.points
    edges = np.concatenate([pts - grid.step / 2, [pts[-1] + grid.step / 2]])
    cdf = ndtr((edges - mean) / std)
    cdf[0], cdf[-1] = 0.0, 1.0
    return LDensity(grid, np.diff(cdf))


def channel_ldensity(spec: ChannelSpec, grid: GridSpec = GridSpec(),
                     punctured: bool = False) -> LDensity:
    if punctured:
        return delta_zero(grid)
    return gaussian_ldensity(spec.llr_mean, grid)


def channel_densities(spec: ChannelSpec, graph: TannerGraph,
                      grid: GridSpec = GridSpec()) -> list[LDensity]:
    """Per-variable channel densities (Delta_0 at punctured positions)."""
    base = channel_ldensity(spec, grid)
    zero = delta_zero(grid)
    return [zero if i in graph.punctured else base for i in range(graph.n_vars)]
