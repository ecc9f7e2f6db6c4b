"""Per-trial RNG streams derived from a master seed."""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(master: int, trial: int, tag: str) -> int:
    """Stable 63-bit seed from ``(master, trial, tag)``.

    Independent of process, worker count and ``PYTHONHASHSEED``.
    """
    digest = hashlib.blake2b(f"{master}:{trial}:{tag}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


def trial_rng(master: int, trial: int, tag: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, trial, tag))
