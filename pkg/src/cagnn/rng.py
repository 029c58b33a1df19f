"""Deterministic random-number streams.

Every source of randomness in the toolkit is a Philox (counter-based)
generator derived from an integer seed plus a spawn key, so any run is
reproducible from its seed alone and independent streams never overlap.
"""

import numpy as np

# Spawn-key tags for the streams a training run draws from.
STREAM_SPLIT = 0
STREAM_INIT = 1
STREAM_TRAIN = 2
STREAM_AUTOENCODER = 3
STREAM_DROPOUT = 4


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Generator for stream ``key`` of ``seed``; same arguments, same stream."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    return np.random.Generator(np.random.Philox(ss))
