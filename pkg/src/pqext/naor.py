"""Statistically-binding bitwise string commitment (Naor-style).

Each message bit occupies one *slot*: the receiver contributes a 3λ-bit
string r, the committer a λ-bit seed s, and the commitment block is
G(s) for bit 0 or G(s) XOR r for bit 1. Blocks, receiver strings and seeds
travel as uint64 arrays; helpers here wrap the kernel backends.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .bits import as_bits
from .errors import CapabilityError, ParameterError
from .prg import PrgSpec, expand_seeds, kernel_args

VAL_BRUTE_FORCE_CAP = 12


@dataclass
class BaseCommitment:
    """Transcript side of a bitwise commitment: one block per message bit."""

    lam: int
    receiver_r: np.ndarray  # uint64, 3λ-bit strings, one per bit slot
    blocks: np.ndarray  # uint64, one per bit slot

    def __post_init__(self):
        if self.receiver_r.shape != self.blocks.shape:
            raise ParameterError("receiver_r / blocks length mismatch")


@dataclass
class BaseDecommit:
    seeds: np.ndarray  # uint64, one λ-bit seed per message bit
    message: np.ndarray  # uint8 bits

    def __post_init__(self):
        if self.seeds.shape != self.message.shape:
            raise ParameterError("seeds / message length mismatch")


def sample_receiver_strings(rng: np.random.Generator, nbits: int, spec: PrgSpec) -> np.ndarray:
    hi = np.uint64(1) << np.uint64(spec.out_len_bits)
    return rng.integers(0, int(hi), size=nbits, dtype=np.uint64)


def sample_seeds(rng: np.random.Generator, nbits: int, spec: PrgSpec) -> np.ndarray:
    return rng.integers(0, 1 << spec.seed_len_bits, size=nbits, dtype=np.uint64)


def commit_slots(mbits: np.ndarray, seeds: np.ndarray, rblocks: np.ndarray, spec: PrgSpec) -> np.ndarray:
    """Bulk slot commitment; flat arrays of equal length."""
    args = kernel_args(spec)
    if args is None:
        blocks = expand_seeds(seeds, spec)
        return blocks ^ (np.asarray(rblocks, dtype=np.uint64) * np.asarray(mbits, dtype=np.uint64))
    backend, key, table = args
    return _kernels.commit(mbits, seeds, rblocks, spec.seed_len_bits, backend, key, table)


def verify_slots(blocks, mbits, seeds, rblocks, spec: PrgSpec) -> np.ndarray:
    args = kernel_args(spec)
    if args is None:
        want = commit_slots(mbits, seeds, rblocks, spec)
        return (np.asarray(blocks, dtype=np.uint64) == want).astype(np.uint8)
    backend, key, table = args
    return _kernels.verify(blocks, mbits, seeds, rblocks, spec.seed_len_bits, backend, key, table)


def base_commit(message, receiver_r: np.ndarray, seeds: np.ndarray, spec: PrgSpec):
    """Commit to a bitstring; randomness is supplied by the caller."""
    mbits = as_bits(message)
    receiver_r = np.asarray(receiver_r, dtype=np.uint64)
    seeds = np.asarray(seeds, dtype=np.uint64)
    if receiver_r.size != mbits.size or seeds.size != mbits.size:
        raise ParameterError("randomness length must match message bit length")
    if seeds.size and int(seeds.max()) >> spec.seed_len_bits:
        raise ParameterError("seed out of range for lambda")
    if receiver_r.size and int(receiver_r.max()) >> spec.out_len_bits:
        raise ParameterError("receiver string out of range for 3*lambda")
    blocks = commit_slots(mbits, seeds, receiver_r, spec)
    return BaseCommitment(spec.seed_len_bits, receiver_r, blocks), BaseDecommit(seeds, mbits)


def base_verify(com: BaseCommitment, message, decom: BaseDecommit, spec: PrgSpec) -> bool:
    """Deterministic re-derivation check; False on malformed input."""
    try:
        mbits = as_bits(message)
    except (ParameterError, TypeError):
        return False
    if (
        mbits.size != com.blocks.size
        or decom.seeds.size != mbits.size
        or (decom.seeds.size and int(decom.seeds.max()) >> spec.seed_len_bits)
    ):
        return False
    ok = verify_slots(com.blocks, mbits, decom.seeds, com.receiver_r, spec)
    return bool(ok.all())


@lru_cache(maxsize=16)
def _image_map(spec: PrgSpec) -> dict[int, int]:
    """value -> seed over all 2^λ seeds (exponential; capped)."""
    seeds = np.arange(1 << spec.seed_len_bits, dtype=np.uint64)
    blocks = expand_seeds(seeds, spec)
    out: dict[int, int] = {}
    for s, b in zip(seeds.tolist(), blocks.tolist()):
        out.setdefault(b, s)
    return out


def slot_decode(block: int, r: int, spec: PrgSpec):
    """Set of bit values the slot can open to, with witnesses {bit: seed}."""
    img = _image_map(spec)
    out = {}
    if block in img:
        out[0] = img[block]
    if block ^ r in img:
        out[1] = img[block ^ r]
    return out


def base_val(com: BaseCommitment, spec: PrgSpec, cap: int = VAL_BRUTE_FORCE_CAP):
    """Committed value by exhaustive seed search: unique message or None.

    Test/oracle operation, exponential in λ.
    """
    if spec.seed_len_bits > cap:
        raise CapabilityError(f"val brute force capped at lambda={cap}")
    out = np.empty(com.blocks.size, dtype=np.uint8)
    for i, (b, r) in enumerate(zip(com.blocks.tolist(), com.receiver_r.tolist())):
        options = slot_decode(b, r, spec)
        if len(options) != 1:
            return None
        out[i] = next(iter(options))
    return out
