"""Deterministic random streams.

Every consumer of randomness draws from a named counter-based generator
(Philox 4x64) keyed by the master seed, a purpose tag, and a (point, trial)
pair. Streams are independent by construction, so trials can be evaluated
in any order or on any worker and still reproduce bit for bit.
"""

from __future__ import annotations

import numpy as np

# Purpose tags keep streams disjoint even when point/trial indices collide.
TAG_INFO_BITS = 0x101
TAG_NOISE = 0x202
TAG_PATTERN = 0x303
TAG_PATTERN_TRIAL = 0x313
TAG_INTERLEAVER = 0x404
TAG_CODE_BUILD = 0x505

_MASK64 = (1 << 64) - 1


def stream(seed: int, tag: int, point: int = 0, trial: int = 0) -> np.random.Generator:
    """Independent generator for (seed, tag, point, trial).

    The tag lands in the first key word, point and trial share the second
    (point in the high 32 bits), so distinct triples never share a key.
    """
    if not 0 <= trial < (1 << 32):
        raise ValueError(f"trial index out of range: {trial}")
    if not 0 <= point < (1 << 32):
        raise ValueError(f"point index out of range: {point}")
    key = ((seed ^ tag) & _MASK64, ((point << 32) | trial) & _MASK64)
    return np.random.Generator(np.random.Philox(key=key))
