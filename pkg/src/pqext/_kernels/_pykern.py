"""Pure-Python (numpy) kernels for bit-slot commitments.

Semantics must match ``_corekern`` exactly; the backend is chosen at import
time in ``pqext._kernels``.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "py"

TOY = 0
PRODUCTION = 1

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _splitmix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def expand(seeds, lam, backend, key, table):
    """Expand λ-bit seeds to 3λ-bit blocks (as uint64)."""
    seeds = np.asarray(seeds, dtype=np.uint64)
    if backend == TOY:
        return table[seeds]
    z = seeds * _GOLDEN + np.uint64(key) + np.uint64(1)
    z = _splitmix(_splitmix(z))
    return z >> np.uint64(64 - 3 * lam)


def commit(mbits, seeds, rblocks, lam, backend, key, table):
    """blocks[i] = expand(seeds[i]) xor (mbits[i] ? rblocks[i] : 0)."""
    blocks = expand(seeds, lam, backend, key, table)
    mask = np.asarray(mbits, dtype=np.uint64)
    return blocks ^ (np.asarray(rblocks, dtype=np.uint64) * mask)


def verify(blocks, mbits, seeds, rblocks, lam, backend, key, table):
    """Per-slot check that blocks re-derive from (mbits, seeds)."""
    want = commit(mbits, seeds, rblocks, lam, backend, key, table)
    return (np.asarray(blocks, dtype=np.uint64) == want).astype(np.uint8)
