"""Classical record-value counts for i.i.d. trials from a continuous
distribution.

Trial k sets a record (a strict running maximum) with probability 1/k,
independently across k, so the expected count after n trials is the
harmonic number H_n = 1 + 1/2 + ... + 1/n, growing like log n, and the
standardized count (count - log n)/sqrt(log n) is asymptotically
standard normal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["RecordCountStats", "expected_records", "simulate_record_counts"]

_EULER_GAMMA = 0.5772156649015329
_PI2_OVER_6 = 1.6449340668482264
# direct summation up to here; asymptotic expansions beyond
_DIRECT_N = 10**6


@dataclass(frozen=True)
class RecordCountStats:
    """Mean and variance of the record count after n i.i.d. trials."""

    n: int
    mean: float
    variance: float
    z_normalized: float | None = None

    def standardize(self, count: float) -> "RecordCountStats":
        """Attach the normal-approximation z-value of an observed count."""
        z = (count - np.log(self.n)) / np.sqrt(np.log(self.n))
        return RecordCountStats(self.n, self.mean, self.variance, float(z))


def expected_records(n: int) -> RecordCountStats:
    """Moments of the record count: mean H_n, variance
    sum_{k<=n} (1/k)(1 - 1/k)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n <= _DIRECT_N:
        inv = 1.0 / np.arange(1, n + 1)
        mean = float(np.sum(inv))
        variance = float(np.sum(inv * (1.0 - inv)))
    else:
        mean = np.log(n) + _EULER_GAMMA + 1.0 / (2 * n)
        variance = mean - (_PI2_OVER_6 - 1.0 / n)
    return RecordCountStats(n=int(n), mean=mean, variance=variance)


def simulate_record_counts(n: int, replicates: int, seed: int = 0) -> np.ndarray:
    """Strict-record counts of ``replicates`` i.i.d. uniform sequences of
    length n; ties (measure zero, but possible in floats) do not count.

    Deterministic given the seed; sequences are processed in fixed-size
    blocks to bound memory.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    rng = np.random.default_rng(seed)
    counts = np.empty(replicates, dtype=np.int64)
    block = max(1, min(replicates, 10**7 // n + 1))
    done = 0
    while done < replicates:
        m = min(block, replicates - done)
        x = rng.random((m, n))
        if n == 1:
            counts[done : done + m] = 1
        else:
            running = np.maximum.accumulate(x[:, :-1], axis=1)
            counts[done : done + m] = 1 + np.sum(x[:, 1:] > running, axis=1)
        done += m
    return counts
