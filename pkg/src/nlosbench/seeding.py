"""Named RNG streams fanned out from one user-facing seed."""

from __future__ import annotations

import hashlib

import numpy as np

U64 = (1 << 64) - 1


def derive_seed(seed: int, stream: str) -> int:
    """``seed`` XOR a stable 64-bit digest of ``stream``."""
    digest = hashlib.blake2b(stream.encode(), digest_size=8).digest()
    return (int(seed) ^ int.from_bytes(digest, "little")) & U64


def rng(seed: int, stream: str | None = None) -> np.random.Generator:
    if stream is not None:
        seed = derive_seed(seed, stream)
    return np.random.Generator(np.random.PCG64(int(seed) & U64))
