"""Named, independent random streams derived from one master seed.

Every stochastic draw in the library pulls from a stream addressed by
``(seed, purpose, ...)``.  Streams are independent of each other, so
toggling one noise term never shifts the draws of another, and any
single trial can be reproduced in isolation from its ``(seed, trial)``
pair alone.
"""

from __future__ import annotations

import numpy as np

# Stream identifiers.  Values are part of the reproducibility contract
# (serialized systems record only seeds); never renumber.
LEFT_BASIS = 0
RIGHT_BASIS = 1
SOLUTION = 2
MATRIX_NOISE = 3
RIGHT_FACTOR_NOISE = 4
RHS_NOISE = 5
SAMPLER = 6
START_POINT = 7
SPECTRUM = 8


def stream(seed: int, *key: int) -> np.random.Generator:
    """Return the generator for the ``(seed, *key)`` stream."""
    if seed < 0:
        raise ValueError("seed must be a nonnegative integer")
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))
