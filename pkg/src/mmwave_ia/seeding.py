"""Labeled random substreams derived from one master seed.

Each stream is keyed by a tuple of labels (e.g. ``("shadow", "LoS")``), so
adding a new run never shifts the randomness of existing ones.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _label_words(labels) -> tuple[int, ...]:
    digest = hashlib.sha256("\x1f".join(str(x) for x in labels).encode()).digest()
    return tuple(int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4))


def seed_sequence(master: int, *labels) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(master), spawn_key=_label_words(labels))


def derive_seed(master: int, *labels) -> int:
    """A 64-bit integer seed for ``labels`` under ``master``."""
    return int(seed_sequence(master, *labels).generate_state(1, dtype=np.uint64)[0])


def substream(master: int, *labels) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(master, *labels))
