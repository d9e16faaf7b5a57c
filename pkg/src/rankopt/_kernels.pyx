# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: hard-pair selection and all-pairs surrogate sums."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log1p, fabs, isfinite

from rankopt.errors import DomainError, EmptyClassError

cnp.import_array()


cdef inline double _phi(int kind, double t) noexcept nogil:
    cdef double e
    if kind == 0:
        e = exp(-fabs(t))
        if t >= 0:
            return log1p(e)
        return -t + log1p(e)
    elif kind == 1:
        return 1.0 - t if t < 1.0 else 0.0
    elif kind == 2:
        return (1.0 - t) * (1.0 - t)
    return exp(-t)


cdef inline double _dphi(int kind, double t) noexcept nogil:
    cdef double e
    if kind == 0:
        e = exp(-fabs(t))
        if t >= 0:
            return -e / (1.0 + e)
        return -1.0 / (1.0 + e)
    elif kind == 1:
        return -1.0 if t < 1.0 else 0.0
    elif kind == 2:
        return -2.0 * (1.0 - t)
    return -exp(-t)


cdef int _scan(const double[::1] s, const signed char[::1] y,
               Py_ssize_t lo, Py_ssize_t hi,
               Py_ssize_t* pos_out, Py_ssize_t* neg_out) noexcept nogil:
    """Min-score positive and max-score negative in [lo, hi); first index wins ties.

    Returns 0 on success, 1 for a bad score, 2 for a bad label.
    """
    cdef Py_ssize_t i, ip = -1, ineg = -1
    cdef double v, best_pos = 0.0, best_neg = 0.0
    cdef signed char lab
    for i in range(lo, hi):
        v = s[i]
        if not isfinite(v) or v < 0.0 or v > 1.0:
            return 1
        lab = y[i]
        if lab == 1:
            if ip < 0 or v < best_pos:
                ip = i
                best_pos = v
        elif lab == 0:
            if ineg < 0 or v > best_neg:
                ineg = i
                best_neg = v
        else:
            return 2
    pos_out[0] = ip
    neg_out[0] = ineg
    return 0


def _raise_scan(int code):
    if code == 1:
        raise DomainError("scores must be finite and lie in [0, 1]")
    raise DomainError("labels must be 0 or 1")


def select_pair(const double[::1] scores, const signed char[::1] labels):
    """Indices (pos, neg) of the hardest pair of the whole array."""
    cdef Py_ssize_t ip, ineg
    cdef int code
    if scores.shape[0] != labels.shape[0]:
        raise DomainError("scores and labels differ in length")
    with nogil:
        code = _scan(scores, labels, 0, scores.shape[0], &ip, &ineg)
    if code:
        _raise_scan(code)
    if ip < 0 or ineg < 0:
        raise EmptyClassError("batch needs at least one positive and one negative")
    return ip, ineg


def segment_pairs(const double[::1] scores, const signed char[::1] labels,
                  const cnp.int64_t[::1] bounds):
    """Hardest pair per segment ``[bounds[k], bounds[k+1])``; -1 where a class is absent."""
    cdef Py_ssize_t nseg = bounds.shape[0] - 1
    cdef Py_ssize_t k, ip, ineg
    cdef int code = 0
    if scores.shape[0] != labels.shape[0]:
        raise DomainError("scores and labels differ in length")
    if nseg < 0:
        raise DomainError("bounds must hold at least one offset")
    pos = np.empty(nseg, dtype=np.int64)
    neg = np.empty(nseg, dtype=np.int64)
    cdef cnp.int64_t[::1] pv = pos
    cdef cnp.int64_t[::1] nv = neg
    with nogil:
        for k in range(nseg):
            code = _scan(scores, labels, bounds[k], bounds[k + 1], &ip, &ineg)
            if code:
                break
            pv[k] = ip
            nv[k] = ineg
    if code:
        _raise_scan(code)
    return pos, neg


def pair_sums(const double[::1] pos, const double[::1] neg, int kind):
    """Sum of phi(pos_i - neg_j) over all pairs, with per-row and per-column phi' sums."""
    cdef Py_ssize_t m = pos.shape[0], n = neg.shape[0], i, j
    cdef double total = 0.0, t, g, row
    gpos = np.zeros(m, dtype=np.float64)
    gneg = np.zeros(n, dtype=np.float64)
    cdef double[::1] gp = gpos
    cdef double[::1] gn = gneg
    with nogil:
        for i in range(m):
            row = 0.0
            for j in range(n):
                t = pos[i] - neg[j]
                total += _phi(kind, t)
                g = _dphi(kind, t)
                row += g
                gn[j] += g
            gp[i] = row
    return total, gpos, gneg
