"""Counter-based random streams keyed by ``(seed, *keys)``.

Every random draw in the package comes from :func:`stream`, so a trial or a
restart sees the same numbers no matter how work is split across threads.
"""

import numpy as np

_SEED_MASK = (1 << 64) - 1


def stream(seed, *keys):
    """Return an independent Philox generator for ``(seed, *keys)``."""
    seed = int(seed)
    if seed < 0 or seed > _SEED_MASK:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    entropy = [seed] + [int(k) for k in keys]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
