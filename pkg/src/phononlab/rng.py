"""Deterministic random streams.

All randomness in a run flows from one integer seed. Independent consumers
(shot sampling, bootstrap resampling, Monte Carlo tests) derive their own
counter-based Philox streams from the seed plus a string path, so adding a
consumer never perturbs the draws of another.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["derive_rng"]


def _path_key(path: tuple[str | int, ...]) -> tuple[int, ...]:
    out = []
    for part in path:
        if isinstance(part, int):
            out.append(part & 0xFFFFFFFF)
        else:
            digest = hashlib.sha256(str(part).encode()).digest()
            out.append(int.from_bytes(digest[:4], "little"))
    return tuple(out)


def derive_rng(seed: int, *path: str | int) -> np.random.Generator:
    """Philox generator for the stream named by ``path`` under ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=_path_key(path))
    return np.random.Generator(np.random.Philox(ss))
