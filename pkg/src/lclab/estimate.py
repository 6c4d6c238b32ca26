"""Monte Carlo estimates with explicit standard errors and seeds.

Every stochastic result in the toolkit is an MCEstimate; tolerances are
uniformly ``k`` standard errors (k = 3 unless a caller overrides it), with a
small double-precision slack so that zero-variance estimates compare sanely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Floating-point noise floor used on top of k*SE comparisons.  Zero-variance
# observables (e.g. |grad psi| constant on a cube family) would otherwise
# demand bit-identical agreement with closed forms computed by another route.
FLOAT_SLACK = 1e-12


@dataclass(frozen=True)
class MCEstimate:
    """Value, standard error, sample count and the seed that produced them."""

    value: float
    std_error: float
    n_samples: int
    seed: int

    def tol(self, k: float = 3.0) -> float:
        scale = max(1.0, abs(float(np.max(np.abs(self.value)))))
        return k * self.std_error + FLOAT_SLACK * scale

    def agrees_with(self, truth: float, k: float = 3.0) -> bool:
        return bool(abs(self.value - truth) <= self.tol(k))

    def at_most(self, bound: float, k: float = 3.0) -> bool:
        return bool(self.value <= bound + self.tol(k))

    def at_least(self, bound: float, k: float = 3.0) -> bool:
        return bool(self.value >= bound - self.tol(k))

    def as_dict(self) -> dict:
        return {
            "value": float(self.value),
            "std_error": float(self.std_error),
            "n_samples": int(self.n_samples),
            "seed": int(self.seed),
        }


def from_values(values: np.ndarray, seed: int) -> MCEstimate:
    """Estimate the mean of i.i.d. scalar samples."""
    values = np.asarray(values, dtype=float)
    n = values.size
    if n == 0:
        raise ValueError("no samples")
    se = float(values.std(ddof=1) / np.sqrt(n)) if n > 1 else float("inf")
    return MCEstimate(float(values.mean()), se, n, seed)


def from_indicator(hits: np.ndarray, seed: int) -> MCEstimate:
    """Estimate a probability from a boolean sample."""
    return from_values(np.asarray(hits, dtype=float), seed)


def combine_blocks(block_sums, block_sq_sums, block_counts, seed: int) -> MCEstimate:
    """Combine per-block partial sums in fixed block order.

    The reduction order is the block index order regardless of how the blocks
    were scheduled, which keeps results bit-identical across thread counts.
    """
    total = 0.0
    total_sq = 0.0
    count = 0
    for s, q, c in zip(block_sums, block_sq_sums, block_counts):
        total += s
        total_sq += q
        count += c
    mean = total / count
    var = max(total_sq / count - mean * mean, 0.0) * count / max(count - 1, 1)
    return MCEstimate(mean, float(np.sqrt(var / count)), count, seed)
