"""Pluggable length-tripling PRG behind the bit commitments.

Two built-in backends:

* ``toy``: a fixed injective lookup table (2^λ records of 3λ bits), shipped
  as a data file so binding / value brute-force tests are exact.  λ ≤ 12.
* ``production``: a keyed splitmix64-style expander; fast and deterministic,
  no enumeration guarantees.

Tests may register extra backends (e.g. idealized random-injective ones)
via :func:`register_backend`; those run on the Python path, not the kernels.
"""

from __future__ import annotations

import hashlib
import importlib.resources
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .bits import as_bits, bits_to_int, int_to_bits
from .errors import ParameterError

TOY_LAMBDA_CAP = 12
_MAGIC = b"PQPRG"

_table_cache: dict[int, np.ndarray] = {}
_custom_backends: dict[str, object] = {}


@dataclass(frozen=True)
class PrgSpec:
    """Parameters of the seed expander: λ-bit seeds to 3λ-bit outputs."""

    seed_len_bits: int
    expansion_factor: int = 3
    backend_id: str = "toy"
    key: int = field(default=0)

    def __post_init__(self):
        if self.expansion_factor != 3:
            raise ParameterError("expansion factor is fixed at 3")
        if self.seed_len_bits < 1:
            raise ParameterError("seed length must be positive")
        if 3 * self.seed_len_bits > 63:
            raise ParameterError("3*lambda must fit in 63 bits")
        if self.backend_id == "toy" and self.seed_len_bits > TOY_LAMBDA_CAP:
            raise ParameterError(f"toy backend capped at lambda={TOY_LAMBDA_CAP}")
        if self.backend_id not in ("toy", "production") and self.backend_id not in _custom_backends:
            raise ParameterError(f"unknown PRG backend {self.backend_id!r}")

    @property
    def out_len_bits(self) -> int:
        return 3 * self.seed_len_bits


def register_backend(name: str, fn) -> None:
    """Register ``fn(seeds: uint64[N], spec) -> uint64[N]`` as a backend."""
    _custom_backends[name] = fn


def _toy_stream(lam: int):
    """Deterministic candidate stream for the toy table (SHA-256 counter mode)."""
    tag = _MAGIC + b"-GEN" + lam.to_bytes(2, "big")
    counter = 0
    while True:
        digest = hashlib.sha256(tag + counter.to_bytes(4, "big")).digest()
        for off in range(0, 32, 8):
            yield int.from_bytes(digest[off : off + 8], "big") >> (64 - 3 * lam)
        counter += 1


def generate_toy_table(lam: int) -> np.ndarray:
    """2^λ distinct 3λ-bit values, fixed for all time by the generation tag."""
    if lam > TOY_LAMBDA_CAP:
        raise ParameterError(f"toy backend capped at lambda={TOY_LAMBDA_CAP}")
    seen = set()
    out = np.empty(1 << lam, dtype=np.uint64)
    stream = _toy_stream(lam)
    idx = 0
    while idx < out.size:
        v = next(stream)
        if v not in seen:
            seen.add(v)
            out[idx] = v
            idx += 1
    return out


def write_toy_table(path: Path, lam: int, table: np.ndarray) -> None:
    """Binary table file: 8-byte header (magic 'PQPRG', λ as u16, pad), then
    2^λ records of 3λ bits, packed contiguously in big-endian bit order."""
    header = _MAGIC + lam.to_bytes(2, "big") + b"\x00"
    width = 3 * lam
    acc = 0
    for v in table:
        acc = (acc << width) | int(v)
    total_bits = width * table.size
    pad = (-total_bits) % 8
    acc <<= pad
    body = acc.to_bytes((total_bits + pad) // 8, "big")
    path.write_bytes(header + body)


def read_toy_table(path: Path) -> tuple[int, np.ndarray]:
    raw = path.read_bytes()
    if len(raw) < 8 or raw[:5] != _MAGIC:
        raise ParameterError("bad toy PRG table header")
    lam = int.from_bytes(raw[5:7], "big")
    width = 3 * lam
    count = 1 << lam
    total_bits = width * count
    body = raw[8:]
    if len(body) != (total_bits + 7) // 8:
        raise ParameterError("toy PRG table body length mismatch")
    acc = int.from_bytes(body, "big") >> ((-total_bits) % 8)
    table = np.empty(count, dtype=np.uint64)
    mask = (1 << width) - 1
    for i in range(count - 1, -1, -1):
        table[i] = acc & mask
        acc >>= width
    if len(set(table.tolist())) != count:
        raise ParameterError("toy PRG table is not injective")
    return lam, table


def toy_table(lam: int) -> np.ndarray:
    """Load the shipped table for λ if present, else generate it (same bytes)."""
    if lam not in _table_cache:
        name = f"prg_toy_lambda{lam}.bin"
        res = importlib.resources.files("pqext.data").joinpath(name)
        if res.is_file():
            with importlib.resources.as_file(res) as p:
                got_lam, table = read_toy_table(Path(p))
            if got_lam != lam:
                raise ParameterError("table file lambda mismatch")
        else:
            table = generate_toy_table(lam)
        _table_cache[lam] = table
    return _table_cache[lam]


def kernel_args(spec: PrgSpec):
    """(backend_code, key, table) triple for the kernel calls, or None if the
    spec uses a registered Python backend."""
    if spec.backend_id == "toy":
        return _kernels.TOY, 0, toy_table(spec.seed_len_bits)
    if spec.backend_id == "production":
        return _kernels.PRODUCTION, spec.key, None
    return None


def expand_seeds(seeds: np.ndarray, spec: PrgSpec) -> np.ndarray:
    """Bulk expansion: uint64 seeds -> uint64 3λ-bit blocks."""
    seeds = np.asarray(seeds, dtype=np.uint64)
    if seeds.size and int(seeds.max()) >> spec.seed_len_bits:
        raise ParameterError("seed out of range for lambda")
    args = kernel_args(spec)
    if args is None:
        return _custom_backends[spec.backend_id](seeds, spec)
    backend, key, table = args
    return _kernels.expand(seeds, spec.seed_len_bits, backend, key, table)


def prg_expand(seed, spec: PrgSpec) -> np.ndarray:
    """Expand one λ-bit seed (bitstring) to its 3λ-bit output bitstring."""
    seed_bits = as_bits(seed, spec.seed_len_bits)
    block = expand_seeds(np.array([bits_to_int(seed_bits)], dtype=np.uint64), spec)
    return int_to_bits(int(block[0]), spec.out_len_bits)
