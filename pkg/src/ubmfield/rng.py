"""Seeded, splittable random streams.

A stream is identified by ``(master_seed, stream_index)``.  Streams with
different keys are statistically independent (they come from distinct
``SeedSequence`` spawn keys); the same key always reproduces the same
bit stream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = ["RngStream", "as_generator", "derive_seed", "RngLike"]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if not isinstance(self.master_seed, (int, np.integer)):
            raise TypeError("master_seed must be an integer")
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")
        if self.stream_index < 0:
            raise ValueError("stream_index must be non-negative")

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        ss = np.random.SeedSequence(
            entropy=int(self.master_seed) & _MASK64,
            spawn_key=(int(self.stream_index),),
        )
        return np.random.Generator(np.random.PCG64(ss))


RngLike = Union[RngStream, np.random.Generator]


def as_generator(rng: RngLike) -> np.random.Generator:
    # A Generator is consumed statefully; a RngStream always restarts.
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def derive_seed(master_seed: int, *keys: int) -> int:
    """64-bit seed for a sub-experiment identified by integer ``keys``."""
    ss = np.random.SeedSequence(entropy=[int(master_seed) & _MASK64, *map(int, keys)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
