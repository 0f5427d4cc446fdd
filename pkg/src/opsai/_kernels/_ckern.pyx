# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; byte-for-byte equivalent to opsai._kernels.pure."""

from libc.stdint cimport uint64_t
from libc.stdlib cimport malloc, free

cdef uint64_t FNV64_OFFSET = <uint64_t> 0xCBF29CE484222325ULL
cdef uint64_t FNV64_PRIME = <uint64_t> 0x100000001B3ULL
cdef uint64_t SPLITMIX_GAMMA = <uint64_t> 0x9E3779B97F4A7C15ULL
cdef uint64_t MIX_A = <uint64_t> 0xBF58476D1CE4E5B9ULL
cdef uint64_t MIX_B = <uint64_t> 0x94D049BB133111EBULL


def fnv1a64(bytes data):
    cdef const unsigned char[:] view = data
    cdef uint64_t h = FNV64_OFFSET
    cdef Py_ssize_t i, n = view.shape[0]
    for i in range(n):
        h = (h ^ view[i]) * FNV64_PRIME
    return h


def levenshtein(bytes a, bytes b):
    if a == b:
        return 0
    cdef const unsigned char[:] va = a
    cdef const unsigned char[:] vb = b
    cdef Py_ssize_t la = va.shape[0], lb = vb.shape[0]
    if la == 0:
        return lb
    if lb == 0:
        return la
    if la < lb:
        va, vb = vb, va
        la, lb = lb, la
    cdef Py_ssize_t *prev = <Py_ssize_t *> malloc((lb + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t *cur = <Py_ssize_t *> malloc((lb + 1) * sizeof(Py_ssize_t))
    if prev == NULL or cur == NULL:
        free(prev)
        free(cur)
        raise MemoryError()
    cdef Py_ssize_t i, j, cost, best, tmp_v
    cdef Py_ssize_t *tmp
    cdef unsigned char ca
    try:
        for j in range(lb + 1):
            prev[j] = j
        for i in range(1, la + 1):
            cur[0] = i
            ca = va[i - 1]
            for j in range(1, lb + 1):
                cost = 0 if ca == vb[j - 1] else 1
                best = prev[j] + 1
                tmp_v = cur[j - 1] + 1
                if tmp_v < best:
                    best = tmp_v
                tmp_v = prev[j - 1] + cost
                if tmp_v < best:
                    best = tmp_v
                cur[j] = best
            tmp = prev
            prev = cur
            cur = tmp
        return prev[lb]
    finally:
        free(prev)
        free(cur)


def splitmix64_next(state):
    cdef uint64_t s = <uint64_t> state
    s = s + SPLITMIX_GAMMA
    cdef uint64_t z = s
    z = (z ^ (z >> 30)) * MIX_A
    z = (z ^ (z >> 27)) * MIX_B
    return s, z ^ (z >> 31)
