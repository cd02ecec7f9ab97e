"""Counter-based deterministic randomness.

Every random draw in fcaf comes from a Philox generator keyed by the run seed
and a textual label, so suites are reproducible independent of call order.
"""
import hashlib

import numpy as np


def derive_seed(seed: int, *labels: object) -> int:
    """Derive a stable 64-bit sub-seed from a root seed and labels."""
    material = ":".join([str(int(seed))] + [str(label) for label in labels])
    digest = hashlib.sha256(material.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def make_rng(seed: int, *labels: object) -> np.random.Generator:
    """Create a Philox-backed generator for (seed, labels)."""
    return np.random.Generator(np.random.Philox(derive_seed(seed, *labels)))
