"""Purpose-keyed random substreams.

Every random draw in the package goes through :func:`substream`, keyed by
``(seed, tag, *index)``.  Two draws with different tags or indices never
share state, so parallel evaluation cannot change results.
"""

import zlib

import numpy as np


def _tag_key(tag):
    return zlib.crc32(tag.encode("utf-8"))


def seed_sequence(seed, tag, *index):
    key = (_tag_key(tag),) + tuple(int(i) for i in index)
    return np.random.SeedSequence(int(seed), spawn_key=key)


def substream(seed, tag, *index):
    """Return a fresh generator for ``(seed, tag, *index)``."""
    return np.random.default_rng(seed_sequence(seed, tag, *index))


def derive_seed(seed, tag, *index):
    """Return a 63-bit integer seed for ``(seed, tag, *index)``."""
    state = seed_sequence(seed, tag, *index).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])
