"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np

_CHUNK = 1 << 22


def _encode(digits, moduli, strides):
    return (digits % moduli) @ strides


def pair_counts(a_digits, b_digits, moduli, strides, order):
    """counts[s] = #{(i, j) : a_i + b_j = s}, exact over Z."""
    if len(a_digits) > len(b_digits):
        a_digits, b_digits = b_digits, a_digits
    counts = np.zeros(order, dtype=np.int64)
    nb = len(b_digits)
    if nb == 0 or len(a_digits) == 0:
        return counts
    step = max(1, _CHUNK // nb)
    for lo in range(0, len(a_digits), step):
        block = a_digits[lo:lo + step]
        idx = _encode(block[:, None, :] + b_digits[None, :, :], moduli, strides)
        counts += np.bincount(idx.ravel(), minlength=order)
    return counts


def convolve_naive(f, g, digits, moduli, strides):
    """(f * g)(x) = |G|^-1 sum_y f(y) g(x - y), by direct double sum."""
    n = len(f)
    out = np.empty(n, dtype=np.complex128)
    step = max(1, _CHUNK // max(n, 1))
    for lo in range(0, n, step):
        rows = digits[lo:lo + step]
        idx = _encode(rows[:, None, :] - digits[None, :, :], moduli, strides)
        out[lo:lo + step] = g[idx] @ f
    return out / n
