"""Deterministic random-generator plumbing.

Every sampler in the package takes an explicit ``numpy.random.Generator``.
``child_rng`` derives independent, reproducible sub-streams from a root seed
and a sequence of string/int labels, so concurrent experiment cells get
stable seeds regardless of execution order.
"""

from __future__ import annotations

import hashlib

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """Fresh PCG64 generator for a 64-bit unsigned seed."""
    return np.random.default_rng(int(seed))


def _label_words(parts) -> tuple[int, ...]:
    digest = hashlib.sha256("\x1f".join(str(p) for p in parts).encode("utf-8")).digest()
    return tuple(int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4))


def child_seed(seed: int, *parts) -> int:
    """Stable 64-bit seed derived from a root seed and labels."""
    words = _label_words(parts)
    mixed = hashlib.sha256(
        int(seed).to_bytes(8, "little", signed=False) + b"::" + repr(words).encode()
    ).digest()
    return int.from_bytes(mixed[:8], "little")


def child_rng(seed: int, *parts) -> np.random.Generator:
    """Generator for the sub-stream named by ``parts`` under ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=_label_words(parts)))
