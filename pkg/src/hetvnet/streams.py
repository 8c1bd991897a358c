"""Named deterministic RNG streams.

Every stochastic draw in the simulator comes from a stream addressed by a
(seed, *tags) tuple, so that independent concerns (mobility turns, shadowing,
fast fading, TVWS occupancy, Wi-Fi contention, exploration, replay sampling)
never share state.  Two runs that derive the same stream names from the same
seed consume identical draw sequences regardless of what the other streams do.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key_words(keys: tuple) -> list[int]:
    words = []
    for k in keys:
        if isinstance(k, str):
            # crc32 is stable across processes (unlike hash() on str)
            words.append(zlib.crc32(k.encode("utf-8")))
        elif isinstance(k, (int, np.integer)):
            words.append(int(k) & 0xFFFFFFFFFFFFFFFF)
        else:
            raise TypeError(f"stream key must be int or str, got {type(k).__name__}")
    return words


def substream(*keys) -> np.random.Generator:
    """Deterministic generator addressed by a tuple of ints/strings."""
    if not keys:
        raise ValueError("at least one stream key is required")
    return np.random.default_rng(np.random.SeedSequence(_key_words(tuple(keys))))


class StreamFamily:
    """Factory for substreams sharing a common key prefix."""

    def __init__(self, *prefix):
        self._prefix = tuple(prefix)

    def stream(self, *keys) -> np.random.Generator:
        return substream(*self._prefix, *keys)

    def family(self, *keys) -> "StreamFamily":
        return StreamFamily(*self._prefix, *keys)
