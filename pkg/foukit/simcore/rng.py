"""Counter-based random streams keyed by (seed, indices...)."""

from typing import Union

import numpy as np

from foukit.errors import DomainError

SeedLike = Union[int, np.random.Generator, None]

_MAX_SEED = 2**64 - 1


def make_generator(seed: int, *stream: int) -> np.random.Generator:
    """
    Return the Philox generator of substream `stream` under `seed`.

    Substreams are derived with SeedSequence spawn keys, so
    make_generator(s, i) is the same stream whichever thread asks for it.

    Args:
        seed: 64-bit unsigned master seed
        *stream: Nonnegative indices naming the substream (e.g. cell, replicate)

    Returns:
        numpy Generator backed by Philox
    """
    if not 0 <= int(seed) <= _MAX_SEED:
        raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if any(int(i) < 0 for i in stream):
        raise DomainError(f"stream indices must be nonnegative, got {stream}")
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(i) for i in stream))
    return np.random.Generator(np.random.Philox(sequence))


def as_generator(seed: SeedLike, *stream: int) -> np.random.Generator:
    """Accept a seed or an existing Generator (returned unchanged)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return make_generator(0 if seed is None else int(seed), *stream)
