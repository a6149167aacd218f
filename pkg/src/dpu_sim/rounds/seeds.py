"""
Named random substreams derived from one master seed.

Each component draws from its own stream so that changing, say, the
minibatch order leaves the initial weights and the data untouched.
"""

import zlib

import numpy as np

INIT = "init"
DATA = "data"
RPU_MASK = "rpu-mask"
SHUFFLE = "shuffle"
FU_INIT = "fu-init"


def derive_seed(master: int, stream: str, *indices: int) -> int:
    """
    Deterministic 64-bit seed for a named substream.

    Args:
        master: non-negative master seed of the experiment
        stream: substream name, e.g. "init" or "rpu-mask"
        indices: further non-negative integers such as the round index

    Returns:
        integer in [0, 2**64)
    """
    if master < 0 or any(i < 0 for i in indices):
        raise ValueError(f"seeds must be non-negative, got {master} {indices}")
    entropy = [master, zlib.crc32(stream.encode("utf-8")), *indices]
    state = np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)
    return int(state[0])


def substream(master: int, stream: str, *indices: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, stream, *indices))
