"""
Counter-based random stream derivation.

A ``SeedSchedule`` turns ``(master_seed, tag, index)`` into an independent
numpy ``Generator`` backed by Philox.  The key holds the master seed and a
digest of the tag; the index occupies the third 64-bit counter word, so
stream *i* never depends on how many streams were drawn before it.  That is
what keeps results identical at every worker count.
"""

from __future__ import annotations

import hashlib

import numpy as np

from densify.errors import InvalidArgumentError

__all__ = ["SeedSchedule", "tag_digest"]

U64_MAX = 2**64 - 1


def tag_digest(tag: str) -> int:
    """Platform-stable 64-bit digest of an experiment tag."""
    raw = hashlib.blake2b(tag.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(raw, "little")


class SeedSchedule:
    """Derives per-trial random streams from one master seed."""

    def __init__(self, master_seed: int):
        if not isinstance(master_seed, (int, np.integer)) or isinstance(master_seed, bool):
            raise InvalidArgumentError(f"seed must be an integer, got {master_seed!r}")
        if not 0 <= int(master_seed) <= U64_MAX:
            raise InvalidArgumentError(f"seed must fit in an unsigned 64-bit integer: {master_seed}")
        self.master_seed = int(master_seed)

    def stream(self, tag: str, index: int) -> np.random.Generator:
        """Generator for trial *index* of experiment *tag*."""
        if index < 0:
            raise InvalidArgumentError(f"stream index must be non-negative, got {index}")
        key = np.array([self.master_seed, tag_digest(tag)], dtype=np.uint64)
        counter = np.array([0, 0, index, 0], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key, counter=counter))

    def __repr__(self) -> str:
        return f"SeedSchedule(master_seed={self.master_seed})"
