"""Deterministic randomness.

Every random choice in the package (weight init, shuffles, fold assignment,
subsampling) flows through a SeededStream so that a run is a pure function of
its seeds. The bit generator is Philox, a counter-based generator whose output
for a given key is fixed across platforms and numpy releases.
"""

from __future__ import annotations

import numpy as np

__all__ = ["SeededStream"]


class SeededStream:
    """A seeded random stream with named, independently-seeded substreams."""

    def __init__(self, seed: int, spawn_key: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.spawn_key = tuple(int(k) for k in spawn_key)
        self._seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self.spawn_key)
        self._gen = np.random.Generator(np.random.Philox(self._seq))

    def substream(self, index: int) -> "SeededStream":
        """Independent child stream; (seed, spawn_key+(index,)) fully determines it."""
        return SeededStream(self.seed, self.spawn_key + (int(index),))

    def uniform(self, low=0.0, high=1.0, size=None) -> np.ndarray:
        return self._gen.uniform(low, high, size)

    def integers(self, low, high=None, size=None) -> np.ndarray:
        return self._gen.integers(low, high, size)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def normal(self, loc=0.0, scale=1.0, size=None) -> np.ndarray:
        return self._gen.normal(loc, scale, size)

    def __repr__(self) -> str:
        return f"SeededStream(seed={self.seed}, spawn_key={self.spawn_key})"
