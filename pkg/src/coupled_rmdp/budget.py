"""Probabilistic sizing of the deviation budget.

If deviations happen independently with probabilities (or mean amounts)
``alphas``, the total exceeds :func:`budget_bound` with probability at most
``delta``. The same bound covers a count of deviating states, a count of
deviating stages and a total fractional deviation amount.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class DeviationRates:
    alphas: Sequence[float]
    delta: float
    probabilities: bool = True

    def __post_init__(self):
        alphas = np.asarray(self.alphas, dtype=float).ravel()
        object.__setattr__(self, "alphas", alphas)
        if not 0.0 < self.delta < 1.0:
            raise ValidationError(f"delta must lie strictly inside (0, 1), got {self.delta}")
        if np.any(alphas < 0):
            raise ValidationError("deviation rates must be nonnegative")
        if self.probabilities and np.any(alphas > 1):
            raise ValidationError("deviation probabilities must not exceed 1")

    @property
    def total(self) -> float:
        return math.fsum(self.alphas)


def budget_bound(rates: DeviationRates) -> float:
    """``sum(a) + log(1/delta)/3 * (1 + sqrt(1 + 18 sum(a) / log(1/delta)))``, natural log."""
    total = rates.total
    L = math.log(1.0 / rates.delta)
    return total + L / 3.0 * (1.0 + math.sqrt(1.0 + 18.0 * total / L))


def integer_budget(rates: DeviationRates) -> int:
    """Smallest integer budget no smaller than :func:`budget_bound`."""
    return math.ceil(budget_bound(rates))


def empirical_coverage_check(rates: DeviationRates, D: float, trials: int = 100_000, seed: int = 0,
                             chunk: int = 10_000) -> float:
    """Fraction of simulated Bernoulli deviation patterns with at most ``D`` deviations.

    Chunk ``j`` of ``chunk`` trials draws from the stream seeded by
    ``(seed, j)``, so the result depends only on ``seed`` and ``trials``.
    """
    alphas = rates.alphas
    covered = 0
    for j, start in enumerate(range(0, trials, chunk)):
        n = min(chunk, trials - start)
        rng = np.random.default_rng([seed, j])
        counts = (rng.random((n, alphas.size)) < alphas).sum(axis=1)
        covered += int(np.count_nonzero(counts <= D))
    return covered / trials
