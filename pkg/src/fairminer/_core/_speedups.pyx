# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""C implementations of the packed-mask counting and perturbation kernels."""

from libc.stdint cimport uint64_t, int64_t

cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #define FM_POPCOUNT64(x) __builtin_popcountll(x)
    #else
    static inline int FM_POPCOUNT64(unsigned long long x) {
        int n = 0;
        while (x) { x &= x - 1; n++; }
        return n;
    }
    #endif
    """
    int FM_POPCOUNT64(unsigned long long x) nogil


def and_popcount(const uint64_t[:, ::1] masks):
    """Number of set bits in the AND of all rows of a packed (m, W) array."""
    cdef Py_ssize_t m = masks.shape[0]
    cdef Py_ssize_t w = masks.shape[1]
    cdef Py_ssize_t i, j
    cdef uint64_t word
    cdef int64_t total = 0
    if m == 0:
        return 0
    with nogil:
        for j in range(w):
            word = masks[0, j]
            for i in range(1, m):
                word &= masks[i, j]
            total += FM_POPCOUNT64(word)
    return total


def and_into(const uint64_t[::1] a, const uint64_t[::1] b, uint64_t[::1] out):
    """out = a & b over packed words; returns the popcount of the result."""
    cdef Py_ssize_t w = a.shape[0]
    cdef Py_ssize_t j
    cdef uint64_t word
    cdef int64_t total = 0
    if b.shape[0] != w or out.shape[0] != w:
        raise ValueError("word arrays must have matching lengths")
    with nogil:
        for j in range(w):
            word = a[j] & b[j]
            out[j] = word
            total += FM_POPCOUNT64(word)
    return total


def perturb_block(double[:, ::1] block, Py_ssize_t col, const double[::1] deltas,
                  double lo, double hi):
    """Add per-row deltas to one column of ``block``, clamped to [lo, hi]."""
    cdef Py_ssize_t n = block.shape[0]
    cdef Py_ssize_t i
    cdef double v
    if deltas.shape[0] != n:
        raise ValueError("deltas length must match block rows")
    with nogil:
        for i in range(n):
            v = block[i, col] + deltas[i]
            if v < lo:
                v = lo
            elif v > hi:
                v = hi
            block[i, col] = v
