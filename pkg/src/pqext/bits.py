"""Bitstring helpers.

Bitstrings are numpy uint8 arrays of 0/1 values, most-significant bit first.
Packed byte forms are big-endian, zero-padded at the tail.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError


def as_bits(value, nbits: int | None = None) -> np.ndarray:
    """Coerce ints / iterables / '0101' strings to a bit array."""
    if isinstance(value, np.ndarray) and value.dtype == np.uint8:
        bits = value
    elif isinstance(value, str):
        if value[:2] in ("0b", "0B"):
            value = value[2:]
        bits = np.frombuffer(value.encode(), dtype=np.uint8) - ord("0")
    elif isinstance(value, int):
        if nbits is None:
            raise ParameterError("int -> bits needs an explicit width")
        if value < 0 or value >> nbits:
            raise ParameterError(f"{value} does not fit in {nbits} bits")
        return int_to_bits(value, nbits)
    else:
        bits = np.asarray(list(value), dtype=np.uint8)
    if bits.ndim != 1 or not np.all(bits <= 1):
        raise ParameterError("bitstrings must be 1-d arrays of 0/1")
    if nbits is not None and bits.size != nbits:
        raise ParameterError(f"expected {nbits} bits, got {bits.size}")
    return bits.astype(np.uint8)


def rand_bits(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.integers(0, 2, size=n, dtype=np.uint8)


def xor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.bitwise_xor(a, b)


def bits_to_bytes(bits: np.ndarray) -> bytes:
    return np.packbits(bits).tobytes()


def bytes_to_bits(data: bytes, nbits: int | None = None) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    if nbits is not None:
        if nbits > bits.size:
            raise ParameterError("byte string shorter than requested bit count")
        bits = bits[:nbits]
    return bits


def bits_to_int(bits: np.ndarray) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def int_to_bits(value: int, nbits: int) -> np.ndarray:
    return np.array([(value >> (nbits - 1 - i)) & 1 for i in range(nbits)], dtype=np.uint8)


def ints_to_packed(values: np.ndarray, width_bits: int) -> bytes:
    """Pack each value into ceil(width/8) big-endian bytes, concatenated."""
    nbytes = (width_bits + 7) // 8
    vals = np.asarray(values, dtype=np.uint64).reshape(-1)
    out = np.zeros((vals.size, nbytes), dtype=np.uint8)
    for k in range(nbytes):
        shift = np.uint64(8 * (nbytes - 1 - k))
        out[:, k] = (vals >> shift).astype(np.uint8)
    return out.tobytes()


def packed_to_ints(data: bytes, width_bits: int, count: int) -> np.ndarray:
    nbytes = (width_bits + 7) // 8
    if len(data) != nbytes * count:
        raise ParameterError("packed array length mismatch")
    raw = np.frombuffer(data, dtype=np.uint8).reshape(count, nbytes)
    vals = np.zeros(count, dtype=np.uint64)
    for k in range(nbytes):
        vals = (vals << np.uint64(8)) | raw[:, k].astype(np.uint64)
    return vals
