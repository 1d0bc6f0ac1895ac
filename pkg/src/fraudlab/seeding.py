"""Deterministic seed derivation.

Every consumer of randomness derives its own stream from a master seed
plus fixed integer tags, so runs reproduce exactly and no two stages share
a stream.
"""

from __future__ import annotations

import numpy as np


def derive_seed(*parts: int) -> int:
    """Fold integer parts into one 64-bit seed via SeedSequence."""
    entropy = [int(p) & ((1 << 63) - 1) for p in parts]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])
