"""Seeded random streams and streaming summary statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_U64 = 1 << 64


class RandomStream:
    """Counter-based random stream keyed by ``(seed, stream_id)``.

    The Philox key is ``seed + 2**64 * stream_id``, so replicate ``r`` always
    reads the same sequence no matter which worker runs it or in what order.
    A stream is owned by one worker at a time; hand it over, never share it.
    """

    def __init__(self, seed: int = 0, stream_id: int = 0):
        seed = int(seed)
        stream_id = int(stream_id)
        if not (0 <= seed < _U64 and 0 <= stream_id < _U64):
            raise DomainError("seed and stream_id must be unsigned 64-bit integers")
        self.seed = seed
        self.stream_id = stream_id
        self._gen = np.random.Generator(np.random.Philox(key=seed + (stream_id << 64)))

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id})"

    def uniform01(self, size=None):
        """Uniform draw(s) on [0, 1)."""
        return self._gen.random(size)

    def uniform(self, lo: float, hi: float, size=None):
        """Uniform draw(s) on [lo, hi), as an affine map of :meth:`uniform01`."""
        return lo + (hi - lo) * self.uniform01(size)

    def bernoulli(self, p, size=None):
        """Bernoulli draw(s) returning 0/1 as int8.

        ``p`` may be a scalar or an array broadcastable to ``size``.
        """
        p = np.asarray(p, dtype=float)
        if np.any(~((p >= 0.0) & (p <= 1.0))):
            raise DomainError("bernoulli probability must lie in [0, 1]")
        if size is None:
            size = p.shape if p.ndim else None
        u = self.uniform01(size)
        out = (u < p).astype(np.int8)
        return int(out) if np.ndim(out) == 0 else out

    def discrete_uniform(self, B: int, size=None):
        """Equiprobable label(s) in 1..B."""
        if int(B) != B or B < 1:
            raise DomainError(f"discrete_uniform needs a positive integer B, got {B!r}")
        out = self._gen.integers(1, int(B) + 1, size=size)
        return int(out) if size is None else out


@dataclass
class SummaryAccumulator:
    """Welford running mean and sum of squared deviations."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def add(self, x: float) -> None:
        self.count += 1
        d = x - self.mean
        self.mean += d / self.count
        self.m2 += d * (x - self.mean)

    def extend(self, xs) -> None:
        for x in np.asarray(xs, dtype=float).ravel():
            self.add(float(x))

    def merge(self, other: "SummaryAccumulator") -> "SummaryAccumulator":
        """Return the accumulator of the concatenated streams (Chan et al. update)."""
        if other.count == 0:
            return SummaryAccumulator(self.count, self.mean, self.m2)
        if self.count == 0:
            return SummaryAccumulator(other.count, other.mean, other.m2)
        n = self.count + other.count
        d = other.mean - self.mean
        mean = self.mean + d * other.count / n
        m2 = self.m2 + other.m2 + d * d * self.count * other.count / n
        return SummaryAccumulator(n, mean, m2)

    def variance(self) -> float:
        if self.count < 2:
            return math.nan
        return self.m2 / (self.count - 1)

    def std(self) -> float:
        return math.sqrt(self.variance())
