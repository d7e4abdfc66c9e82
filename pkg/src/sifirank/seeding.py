"""Named sub-seed derivation.

All randomness in an experiment descends from a single root seed. A
component asks for ``derive_seed(root, "exposures")`` or
``derive_seed(root, "shock", run)`` and gets a stable 63-bit integer that
does not depend on the order in which other components draw.
"""
import hashlib

import numpy as np


def derive_seed(root, name, index=None):
    """Return a deterministic sub-seed for ``(root, name, index)``."""
    key = f"{int(root)}/{name}" if index is None else f"{int(root)}/{name}/{int(index)}"
    digest = hashlib.sha256(key.encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def rng_for(root, name, index=None):
    return np.random.default_rng(derive_seed(root, name, index))
