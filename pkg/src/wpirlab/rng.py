"""Seeded randomness with documented substream derivation.

All protocol randomness (permutations, the time-sharing draw, decoy sets,
clean-target choices, coefficient vectors) derives from a single 64-bit root
seed.  The generator is numpy's Philox 4x64-10 counter-based PRNG; substreams
are keyed by SeedSequence(root_seed, label_0, label_1, ...) where string
labels are mapped to 64-bit integers via SHA-256.  Philox bit streams are
stable across numpy versions, so every experiment is exactly replayable.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _label_int(label) -> int:
    if isinstance(label, str):
        return int.from_bytes(hashlib.sha256(label.encode()).digest()[:8], "big")
    return int(label) & _MASK64


def substream(seed: int, *labels) -> np.random.Generator:
    """Derive an independent generator for (seed, labels)."""
    entropy = [int(seed) & _MASK64] + [_label_int(lab) for lab in labels]
    return np.random.Generator(np.random.Philox(key=None, seed=np.random.SeedSequence(entropy)))


def random_permutation(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.permutation(n)
