# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for bit-slot commitments (hot path).

Mirrors ``_pykern`` exactly; selected at import in ``pqext._kernels``.
"""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport uint8_t, uint64_t

BACKEND_NAME = "c"

TOY = 0
PRODUCTION = 1

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15u
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9u
cdef uint64_t MIX2 = 0x94D049BB133111EBu


cdef inline uint64_t splitmix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


cdef inline uint64_t expand_one(uint64_t seed, int shift, int backend,
                                uint64_t key, const uint64_t* table) nogil:
    cdef uint64_t z
    if backend == 0:
        return table[seed]
    z = seed * GOLDEN + key + 1u
    return splitmix(splitmix(z)) >> shift


def expand(seeds, int lam, int backend, key, table):
    """Expand λ-bit seeds to 3λ-bit blocks (as uint64)."""
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] s = np.ascontiguousarray(seeds, dtype=np.uint64)
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] out = np.empty(s.shape[0], dtype=np.uint64)
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] tab
    cdef const uint64_t* tp = NULL
    if backend == 0:
        tab = np.ascontiguousarray(table, dtype=np.uint64)
        tp = <const uint64_t*> tab.data
    cdef uint64_t k = <uint64_t> key
    cdef int shift = 64 - 3 * lam
    cdef Py_ssize_t i, n = s.shape[0]
    with nogil:
        for i in range(n):
            out[i] = expand_one(s[i], shift, backend, k, tp)
    return out


def commit(mbits, seeds, rblocks, int lam, int backend, key, table):
    """blocks[i] = expand(seeds[i]) xor (mbits[i] ? rblocks[i] : 0)."""
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] m = np.ascontiguousarray(mbits, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] s = np.ascontiguousarray(seeds, dtype=np.uint64)
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] r = np.ascontiguousarray(rblocks, dtype=np.uint64)
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] out = np.empty(s.shape[0], dtype=np.uint64)
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] tab
    cdef const uint64_t* tp = NULL
    if backend == 0:
        tab = np.ascontiguousarray(table, dtype=np.uint64)
        tp = <const uint64_t*> tab.data
    cdef uint64_t k = <uint64_t> key
    cdef int shift = 64 - 3 * lam
    cdef Py_ssize_t i, n = s.shape[0]
    cdef uint64_t b
    with nogil:
        for i in range(n):
            b = expand_one(s[i], shift, backend, k, tp)
            if m[i]:
                b ^= r[i]
            out[i] = b
    return out


def verify(blocks, mbits, seeds, rblocks, int lam, int backend, key, table):
    """Per-slot check that blocks re-derive from (mbits, seeds)."""
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] c = np.ascontiguousarray(blocks, dtype=np.uint64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] m = np.ascontiguousarray(mbits, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] s = np.ascontiguousarray(seeds, dtype=np.uint64)
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] r = np.ascontiguousarray(rblocks, dtype=np.uint64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] out = np.empty(s.shape[0], dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] tab
    cdef const uint64_t* tp = NULL
    if backend == 0:
        tab = np.ascontiguousarray(table, dtype=np.uint64)
        tp = <const uint64_t*> tab.data
    cdef uint64_t k = <uint64_t> key
    cdef int shift = 64 - 3 * lam
    cdef Py_ssize_t i, n = s.shape[0]
    cdef uint64_t b
    with nogil:
        for i in range(n):
            b = expand_one(s[i], shift, backend, k, tp)
            if m[i]:
                b ^= r[i]
            out[i] = 1 if b == c[i] else 0
    return out
