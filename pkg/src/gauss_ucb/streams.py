"""Reproducible random streams.

Each replication (or block of Monte Carlo paths) gets its own Philox
generator, keyed by a 64-bit seed mixed from ``(master_seed, index)`` with
``SeedSequence``.  Philox is counter based, so streams are independent of
the order in which replications are executed.  Normals come from numpy's
ziggurat sampler; bit-exact output is only promised for a fixed numpy build.
"""

import numpy as np


def derive_seed(master_seed: int, index: int) -> int:
    """64-bit seed for stream ``index`` under ``master_seed``."""
    if master_seed < 0 or index < 0:
        raise ValueError("seeds and stream indices must be non-negative")
    ss = np.random.SeedSequence([int(master_seed), int(index)])
    return int(ss.generate_state(1, np.uint64)[0])


def generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))
