import numpy as np


def derive_seed(base, *path) -> int:
    """Deterministic 63-bit child seed of ``base`` along an integer path."""
    ss = np.random.SeedSequence(int(base), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(2, dtype=np.uint64)[0] >> np.uint64(1))
