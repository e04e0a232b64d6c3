# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of ``nlum._pykernels``.

Tableaux are copied into int64 buffers; products are formed in 128 bits and
every stored result is range-checked.  Anything that does not fit raises
``OverflowError`` before the caller's lists are touched, so the caller can
rerun the same step with the pure-Python kernel.
"""

from libc.stdlib cimport malloc, free
from libc.stdint cimport int64_t, INT64_MAX, INT64_MIN

cdef extern from *:
    ctypedef long long i128 "__int128"

OPTIMAL = 0
UNBOUNDED = 1

cdef enum:
    K_MONOTONE = 0
    K_TWO_MONOTONE = 1
    K_TWO_ALTERNATING = 2
    K_SUBADDITIVE = 3
    K_SUPERADDITIVE = 4
    K_QUASI_SUPERADDITIVE = 5
    K_UPPER_SUPERADDITIVE = 6
    K_SELF_CONJUGATE_LOWER = 7
    K_ADDITIVE = 8
    K_SELF_CONJUGATE_PRECISE = 9


cdef inline bint _fits(i128 x) nogil:
    return x <= <i128>INT64_MAX and x >= <i128>INT64_MIN


cdef int _pivot(int64_t* t, Py_ssize_t nrows, Py_ssize_t ncols,
                Py_ssize_t p, Py_ssize_t q, int64_t* det) nogil:
    """Returns 0 on success, 1 on overflow (tableau then unusable)."""
    cdef int64_t piv = t[p * ncols + q]
    cdef int64_t d = det[0]
    cdef int64_t f
    cdef Py_ssize_t i, j
    cdef i128 x
    cdef int64_t* row
    cdef int64_t* prow = t + p * ncols
    for i in range(nrows):
        if i == p:
            continue
        row = t + i * ncols
        f = row[q]
        if f == 0:
            if piv != d:
                for j in range(ncols):
                    x = (<i128>row[j] * piv) / d
                    if not _fits(x):
                        return 1
                    row[j] = <int64_t>x
        else:
            for j in range(ncols):
                x = (<i128>row[j] * piv - <i128>f * prow[j]) / d
                if not _fits(x):
                    return 1
                row[j] = <int64_t>x
    if piv < 0:
        if piv == INT64_MIN:
            return 1
        for i in range(nrows * ncols):
            if t[i] == INT64_MIN:
                return 1
            t[i] = -t[i]
        piv = -piv
    det[0] = piv
    return 0


def bland(list rows, list basis, object det, list eligible, Py_ssize_t max_pivots):
    """Same contract as ``nlum._pykernels.bland``."""
    cdef Py_ssize_t nrows = len(rows)
    cdef Py_ssize_t ncols = len(rows[0])
    cdef Py_ssize_t m = nrows - 1
    cdef Py_ssize_t rhs = ncols - 1
    cdef Py_ssize_t ne = len(eligible)
    cdef Py_ssize_t i, j, k, q, best, pivots = 0
    cdef int64_t a, num, best_num = 0, best_den = 0
    cdef i128 lhs, rcmp
    cdef int64_t d = det
    cdef int status
    cdef list row
    cdef int64_t* t = <int64_t*> malloc(nrows * ncols * sizeof(int64_t))
    cdef Py_ssize_t* bas = <Py_ssize_t*> malloc(m * sizeof(Py_ssize_t) + 1)
    cdef Py_ssize_t* elig = <Py_ssize_t*> malloc(ne * sizeof(Py_ssize_t) + 1)
    if t == NULL or bas == NULL or elig == NULL:
        free(t); free(bas); free(elig)
        raise MemoryError()
    try:
        for i in range(nrows):
            row = rows[i]
            for j in range(ncols):
                t[i * ncols + j] = row[j]
        for i in range(m):
            bas[i] = basis[i]
        for k in range(ne):
            elig[k] = eligible[k]
        with nogil:
            while True:
                q = -1
                for k in range(ne):
                    if t[m * ncols + elig[k]] < 0:
                        q = elig[k]
                        break
                if q < 0:
                    status = 0
                    break
                best = -1
                for i in range(m):
                    a = t[i * ncols + q]
                    if a > 0:
                        num = t[i * ncols + rhs]
                        if best < 0:
                            best = i
                            best_num = num
                            best_den = a
                            continue
                        lhs = <i128>num * best_den
                        rcmp = <i128>best_num * a
                        if lhs < rcmp or (lhs == rcmp and bas[i] < bas[best]):
                            best = i
                            best_num = num
                            best_den = a
                if best < 0:
                    status = 1
                    break
                if pivots >= max_pivots:
                    status = 3
                    break
                if _pivot(t, nrows, ncols, best, q, &d):
                    status = 2
                    break
                bas[best] = q
                pivots += 1
        if status == 2:
            raise OverflowError("tableau entry exceeds 64 bits")
        if status == 3:
            raise RuntimeError("simplex exceeded its pivot budget")
        for i in range(nrows):
            rows[i] = [t[i * ncols + j] for j in range(ncols)]
        for i in range(m):
            basis[i] = bas[i]
        return status, d, pivots
    finally:
        free(t)
        free(bas)
        free(elig)


def scan_pairs(list values, int n, int kind, object scale):
    """Same contract as ``nlum._pykernels.scan_pairs``."""
    cdef Py_ssize_t size = (<Py_ssize_t>1) << n
    cdef Py_ssize_t full = size - 1
    cdef Py_ssize_t a, b, i, bit
    cdef Py_ssize_t found_a = -1, found_b = -1
    cdef int64_t s = scale
    cdef i128 va, vb
    cdef bint bad = False
    cdef int64_t* v = <int64_t*> malloc(size * sizeof(int64_t))
    if v == NULL:
        raise MemoryError()
    try:
        if kind < K_MONOTONE or kind > K_SELF_CONJUGATE_PRECISE:
            raise ValueError(f"unknown scan kind {kind}")
        for a in range(size):
            v[a] = values[a]
        with nogil:
            if kind == K_MONOTONE:
                for a in range(size):
                    for i in range(n):
                        bit = (<Py_ssize_t>1) << i
                        if not (a & bit) and v[a] > v[a | bit]:
                            found_a = a
                            found_b = a | bit
                            break
                    if found_a >= 0:
                        break
            elif kind == K_SELF_CONJUGATE_LOWER or kind == K_SELF_CONJUGATE_PRECISE:
                for a in range(size):
                    if kind == K_SELF_CONJUGATE_LOWER:
                        bad = <i128>v[a] + v[full ^ a] > s
                    else:
                        bad = <i128>v[a] + v[full ^ a] != s
                    if bad:
                        found_a = a
                        found_b = full ^ a
                        break
            else:
                for a in range(size):
                    va = v[a]
                    for b in range(a, size):
                        vb = v[b]
                        if kind == K_TWO_MONOTONE:
                            bad = <i128>v[a | b] + v[a & b] < va + vb
                        elif kind == K_TWO_ALTERNATING:
                            bad = <i128>v[a | b] + v[a & b] > va + vb
                        elif kind == K_SUBADDITIVE:
                            bad = v[a | b] > va + vb
                        elif kind == K_SUPERADDITIVE:
                            bad = (a & b) == 0 and v[a | b] < va + vb
                        elif kind == K_QUASI_SUPERADDITIVE:
                            bad = <i128>s + v[a & b] < va + vb
                        elif kind == K_UPPER_SUPERADDITIVE:
                            bad = (a | b) == full and va + vb < <i128>s + v[a & b]
                        else:
                            bad = (a & b) == 0 and v[a | b] != va + vb
                        if bad:
                            found_a = a
                            found_b = b
                            break
                    if found_a >= 0:
                        break
        if found_a >= 0:
            return found_a, found_b
        return None
    finally:
        free(v)
