"""Deterministic RNG derivation.

Every random stream in the library is derived from an integer base seed
plus a tuple of fixed integer tags, so identical configs reproduce the
same streams regardless of call order elsewhere.
"""

import numpy as np

# stream tags (stable; appending new ones is fine, renumbering is not)
T_RESET = 1
T_ACTION = 2
T_CODE = 3
T_SHUFFLE = 4
T_EXPERT = 5
T_SPLIT = 6
T_EVAL = 7
T_INIT = 8
T_BATCH = 9
T_WARMSTART = 10


def derive_rng(seed: int, *tags: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((int(seed),) + tuple(int(t) for t in tags))))
