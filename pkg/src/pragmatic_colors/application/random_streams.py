"""Seed splitting.

Every random draw in the library comes from a generator keyed by
``SeedSequence([seed, stream, *indices])``. Streams are fixed integers, so
a given (seed, stream, index) always yields the same numbers regardless of
what else ran before it or on which worker.
"""

from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    """Stream identifiers; values are part of the reproducibility contract."""

    SPEAKER_INIT = 0
    LISTENER_INIT = 1
    SPEAKER_DATA = 2
    LISTENER_DATA = 3
    VALIDATION_CHOICE = 4
    TEST_QUERY = 5
    VALIDATION_QUERY = 6
    SYNTHETIC = 7
    PREDICT = 8
    PARTITION = 9


def rng_for(seed: int, stream: Stream, *indices: int) -> np.random.Generator:
    """Generator for one stream, optionally split further by indices.

    Args:
        seed: Non-negative user seed (64-bit range)
        stream: Stream identifier
        *indices: Further keys, e.g. the triple index

    Raises:
        ValueError: If the seed or any index is negative
    """
    if seed < 0 or any(i < 0 for i in indices):
        raise ValueError("seeds and stream indices must be non-negative")
    return np.random.default_rng(np.random.SeedSequence([seed, int(stream), *indices]))
