"""Deterministic block-parallel Monte Carlo.

Samples are split into fixed-size blocks. Block ``b`` draws from its own
Philox stream spawned from ``SeedSequence(seed)`` with key ``b``, so the
random numbers a block sees do not depend on how blocks are assigned to
workers. Per-block results are reduced in block order, which makes the
final answer bit-identical for every worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, TypeVar

import numpy as np

from .errors import DomainError

BLOCK_SIZE = 1 << 16
T = TypeVar("T")


def block_rng(seed: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(ss))


def block_sizes(samples: int, block_size: int = BLOCK_SIZE) -> list[int]:
    if samples < 1:
        raise DomainError(f"samples must be >= 1, got {samples!r}")
    full, rest = divmod(samples, block_size)
    return [block_size] * full + ([rest] if rest else [])


def run_blocks(
    fn: Callable[[np.random.Generator, int], T],
    samples: int,
    seed: int,
    workers: int = 1,
    block_size: int = BLOCK_SIZE,
) -> list[T]:
    """Evaluate ``fn(rng, size)`` on every block and return results in block order."""
    if workers < 1:
        raise DomainError(f"workers must be >= 1, got {workers!r}")
    sizes = block_sizes(samples, block_size)

    def one(b: int) -> T:
        return fn(block_rng(seed, b), sizes[b])

    if workers == 1 or len(sizes) == 1:
        return [one(b) for b in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(len(sizes))))


@dataclass(frozen=True)
class Moments:
    """Streaming count, mean and centred sum of squares (mergeable)."""

    count: int
    mean: float
    m2: float

    @classmethod
    def of(cls, values: np.ndarray) -> Moments:
        v = np.asarray(values, dtype=float)
        if v.size == 0:
            return cls(0, 0.0, 0.0)
        mu = float(v.mean())
        return cls(int(v.size), mu, float(np.sum((v - mu) ** 2)))

    def merge(self, other: Moments) -> Moments:
        if self.count == 0:
            return other
        if other.count == 0:
            return self
        n = self.count + other.count
        d = other.mean - self.mean
        mean = self.mean + d * other.count / n
        m2 = self.m2 + other.m2 + d * d * self.count * other.count / n
        return Moments(n, mean, m2)

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def std_error(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count else math.inf


def merge_all(parts: list[Moments]) -> Moments:
    acc = Moments(0, 0.0, 0.0)
    for m in parts:
        acc = acc.merge(m)
    return acc
