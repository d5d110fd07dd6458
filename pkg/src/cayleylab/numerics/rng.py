"""Counter-based random streams keyed on (master seed, stream index)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MIX = 0x9E3779B97F4A7C15  # golden-ratio increment for substream derivation


@dataclass(frozen=True)
class SeededRng:
    """Reproducible RNG handle: (seed, stream) -> byte stream is pure.

    Distinct streams are statistically independent (Philox counters).
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed % 2 ** 64, self.stream % 2 ** 64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, index: int) -> "SeededRng":
        """Derive a child stream; pure in (seed, stream, index)."""
        child = (self.stream * _MIX + index + 1) % 2 ** 64
        return SeededRng(self.seed, child)

    def split(self, count: int):
        return [self.substream(i) for i in range(count)]
