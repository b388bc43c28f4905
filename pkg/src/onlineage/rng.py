"""Named seed derivation.

Every stochastic choice draws from a generator derived from the run seed plus
a purpose path (stage name, cluster id, fold index, ...), so any piece can be
replayed in isolation and adding a new consumer never shifts the others.
"""

import hashlib

import numpy as np


def derive_seed(seed: int, *path) -> int:
    """Hash ``seed`` and a purpose path into a 63-bit integer seed."""
    h = hashlib.sha256(str(int(seed)).encode())
    for part in path:
        h.update(b"/")
        h.update(str(part).encode())
    return int.from_bytes(h.digest()[:8], "little") >> 1


def make_rng(seed: int, *path) -> np.random.Generator:
    if not path:
        return np.random.default_rng(int(seed))
    return np.random.default_rng(derive_seed(seed, *path))


def stream(seed: int, *indices: int) -> np.random.Generator:
    """Counter-style stream: independent generator per integer index tuple."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, indices)]))
