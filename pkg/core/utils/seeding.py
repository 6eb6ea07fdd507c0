from typing import Optional

import numpy as np

MAX_SEED = 2**64 - 1


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"Seed must be an unsigned 64-bit integer, got {seed}.")
    return seed


def derive_sequence(master_seed: int, *path: int) -> np.random.SeedSequence:
    """
    Hashes (master seed, index path) into an independent SeedSequence.

    Results depend only on the path, never on which worker evaluates it.
    """
    return np.random.SeedSequence(check_seed(master_seed), spawn_key=tuple(int(p) for p in path))


def derive_rng(master_seed: int, *path: int) -> np.random.Generator:
    return np.random.default_rng(derive_sequence(master_seed, *path))


def replication_rng(master_seed: int, replication: Optional[int]) -> np.random.Generator:
    if replication is None:
        return np.random.default_rng(check_seed(master_seed))
    return derive_rng(master_seed, replication)
