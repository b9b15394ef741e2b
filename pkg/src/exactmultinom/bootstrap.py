"""Nonparametric bootstrap percentile intervals, the comparison baseline."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ConfigError, PsiSpec, theta_hat


@dataclass(frozen=True)
class BootstrapConfig:
    replicates: int = 500
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if int(self.replicates) < 2:
            raise ConfigError(f"need at least 2 bootstrap replicates, got {self.replicates}")
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")


def bootstrap_replicates(data, psi: PsiSpec, config: BootstrapConfig = None) -> np.ndarray:
    """psi evaluated at the proportions of each multinomial resample."""
    config = config or BootstrapConfig()
    rng = np.random.default_rng([int(config.seed), 0xB007])
    blocks = theta_hat(data).blocks()
    resampled = []
    for s, p in zip(data.samples, blocks):
        draws = rng.multinomial(s.n, p, size=int(config.replicates))
        resampled.append(draws / s.n)
    return psi.many(np.concatenate(resampled, axis=1))


def bootstrap_ci(data, psi: PsiSpec, config: BootstrapConfig = None) -> tuple:
    """Percentile interval from order statistics.

    The limits are the order statistics at 1-based ranks
    ``ceil(R * alpha/2)`` and ``ceil(R * (1 - alpha/2))`` of the R replicates.
    """
    config = config or BootstrapConfig()
    values = np.sort(bootstrap_replicates(data, psi, config))
    r = len(values)
    # round first so that e.g. 1000 * 0.975 is not pushed to the next rank
    lo_rank = max(1, math.ceil(round(r * config.alpha / 2, 9)))
    hi_rank = min(r, math.ceil(round(r * (1 - config.alpha / 2), 9)))
    return float(values[lo_rank - 1]), float(values[hi_rank - 1])
