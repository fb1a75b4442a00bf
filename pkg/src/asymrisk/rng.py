"""Deterministic random number sourcing.

Every Monte Carlo routine draws through a RandomSource. Draws are a pure
function of (seed, stream_id, substream index): substreams are derived with
SeedSequence spawning over a counter-based bit generator (Philox), so the
same request produces the same numbers no matter how the work is chunked,
scheduled, or distributed across workers.

Simulators consume one substream per fixed-size chunk of CHUNK_PATHS paths.
The chunk size is an algorithmic constant, not a tuning knob: changing it
would change the draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["RandomSource", "CHUNK_PATHS"]

CHUNK_PATHS = 16384


@dataclass(frozen=True)
class RandomSource:
    """Root of a reproducible family of generators.

    Parameters
    ----------
    seed : int
        Nonnegative user seed.
    stream_id : int
        Distinguishes independent consumers sharing one seed (e.g. the
        state simulator vs. a validation resample).
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not (isinstance(self.seed, (int, np.integer)) and self.seed >= 0):
            raise ValueError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if not (isinstance(self.stream_id, (int, np.integer)) and self.stream_id >= 0):
            raise ValueError(f"stream_id must be a nonnegative integer, got {self.stream_id!r}")

    def generator(self, substream: int = 0) -> np.random.Generator:
        """Generator for one substream; identical (seed, stream_id, substream)
        always yields identical draws."""
        ss = np.random.SeedSequence([int(self.seed), int(self.stream_id), int(substream)])
        return np.random.Generator(np.random.Philox(ss))

    def child(self, stream_id: int) -> "RandomSource":
        return RandomSource(self.seed, stream_id)


def as_source(seed_or_source) -> RandomSource:
    """Accept either a plain int seed or an existing RandomSource."""
    if isinstance(seed_or_source, RandomSource):
        return seed_or_source
    return RandomSource(int(seed_or_source))
