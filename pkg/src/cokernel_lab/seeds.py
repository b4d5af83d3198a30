"""Deterministic seed derivation and RNG construction.

All randomness in the library flows through a counter-based generator
(Philox) keyed by 64-bit seeds derived with a stable cryptographic hash,
so runs are reproducible across platforms and process counts.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(*parts: int) -> int:
    """Stable 64-bit seed from integer parts (master seed, replica, ...).

    Uses blake2b over the decimal rendering; never Python's salted hash().
    """
    text = ":".join(str(int(p)) for p in parts)
    digest = hashlib.blake2b(text.encode("ascii"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=seed & (2**64 - 1)))


def stable_digest(data: bytes, size: int = 8) -> str:
    """Short stable hex digest used to fingerprint sampled subsets."""
    return hashlib.blake2b(data, digest_size=size).hexdigest()
