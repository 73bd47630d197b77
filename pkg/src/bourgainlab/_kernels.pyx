# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops over mixed-radix group enumerations.

Both kernels take elements as digit rows (little-endian mixed radix) and
return arrays indexed by the enumeration of the group.
"""

import numpy as np

cimport numpy as cnp

ctypedef cnp.int64_t i64


def pair_counts(const i64[:, ::1] a_digits, const i64[:, ::1] b_digits,
                const i64[::1] moduli, const i64[::1] strides, Py_ssize_t order):
    """counts[s] = #{(i, j) : a_i + b_j = s}, exact over Z."""
    counts = np.zeros(order, dtype=np.int64)
    cdef i64[::1] c = counts
    cdef Py_ssize_t na = a_digits.shape[0]
    cdef Py_ssize_t nb = b_digits.shape[0]
    cdef Py_ssize_t k = moduli.shape[0]
    cdef Py_ssize_t i, j, r
    cdef i64 s, idx, m0, ai
    if k == 1:
        m0 = moduli[0]
        for i in range(na):
            ai = a_digits[i, 0]
            for j in range(nb):
                s = ai + b_digits[j, 0]
                if s >= m0:
                    s -= m0
                c[s] += 1
        return counts
    for i in range(na):
        for j in range(nb):
            idx = 0
            for r in range(k):
                s = a_digits[i, r] + b_digits[j, r]
                if s >= moduli[r]:
                    s -= moduli[r]
                idx += s * strides[r]
            c[idx] += 1
    return counts


def convolve_naive(const double complex[::1] f, const double complex[::1] g,
                   const i64[:, ::1] digits, const i64[::1] moduli,
                   const i64[::1] strides):
    """(f * g)(x) = |G|^-1 sum_y f(y) g(x - y), by direct double loop."""
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t k = moduli.shape[0]
    out = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef Py_ssize_t x, y, r
    cdef i64 s, idx
    cdef double complex acc
    for x in range(n):
        acc = 0
        for y in range(n):
            if k == 1:
                s = x - y
                if s < 0:
                    s += n
                idx = s
            else:
                idx = 0
                for r in range(k):
                    s = digits[x, r] - digits[y, r]
                    if s < 0:
                        s += moduli[r]
                    idx += s * strides[r]
            acc = acc + f[y] * g[idx]
        o[x] = acc / n
    return out
