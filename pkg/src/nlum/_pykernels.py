"""Pure-Python hot loops; the compiled ``_ckernels`` module mirrors this file.

Both implementations must return identical results, including which
violating pair is reported first.
"""

OPTIMAL = 0
UNBOUNDED = 1

# Pair-scan kinds.  ``scale`` is the integer standing for the value 1.
MONOTONE = 0
TWO_MONOTONE = 1
TWO_ALTERNATING = 2
SUBADDITIVE = 3
SUPERADDITIVE = 4
QUASI_SUPERADDITIVE = 5
UPPER_SUPERADDITIVE = 6
SELF_CONJUGATE_LOWER = 7
ADDITIVE = 8
SELF_CONJUGATE_PRECISE = 9


def pivot(rows, p, q, det):
    """Fraction-free Gauss-Jordan pivot on ``rows[p][q]``, in place.

    ``rows`` hold integers ``N`` such that the tableau entry is ``N / det``.
    Returns the new (positive) common denominator.
    """
    prow = rows[p]
    piv = prow[q]
    if piv == 0:
        raise ZeroDivisionError("pivot on a zero entry")
    for i, row in enumerate(rows):
        if i == p:
            continue
        f = row[q]
        if f == 0:
            if piv != det:
                rows[i] = [x * piv // det for x in row]
        else:
            rows[i] = [(x * piv - f * y) // det for x, y in zip(row, prow)]
    if piv < 0:
        for i, row in enumerate(rows):
            rows[i] = [-x for x in row]
        piv = -piv
    return piv


def bland(rows, basis, det, eligible, max_pivots):
    """Primal simplex with Bland's rule on a fraction-free tableau.

    The last row is the reduced-cost row of a minimisation, the last column the
    right-hand side.  ``eligible`` lists, in increasing order, the columns
    allowed to enter.  Mutates ``rows`` and ``basis``; returns
    ``(status, det, pivots)``.
    """
    m = len(rows) - 1
    rhs = len(rows[0]) - 1
    pivots = 0
    while True:
        obj = rows[m]
        q = -1
        for j in eligible:
            if obj[j] < 0:
                q = j
                break
        if q < 0:
            return OPTIMAL, det, pivots
        best = -1
        best_num = best_den = 0
        for i in range(m):
            a = rows[i][q]
            if a > 0:
                num = rows[i][rhs]
                if best < 0:
                    best, best_num, best_den = i, num, a
                    continue
                lhs = num * best_den
                rhs_cmp = best_num * a
                if lhs < rhs_cmp or (lhs == rhs_cmp and basis[i] < basis[best]):
                    best, best_num, best_den = i, num, a
        if best < 0:
            return UNBOUNDED, det, pivots
        if pivots >= max_pivots:
            raise RuntimeError("simplex exceeded its pivot budget")
        det = pivot(rows, best, q, det)
        basis[best] = q
        pivots += 1


def scan_pairs(values, n, kind, scale):
    """Return the first violating ``(A, B)`` pair of bit-sets, or ``None``.

    ``values`` are integers indexed by bit-set; the comparisons are exact.
    Iteration order: ``A`` ascending, then ``B`` ascending from ``A``.
    """
    size = 1 << n
    full = size - 1
    v = values
    if kind == MONOTONE:
        for a in range(size):
            va = v[a]
            for i in range(n):
                bit = 1 << i
                if not a & bit and va > v[a | bit]:
                    return a, a | bit
        return None
    if kind == SELF_CONJUGATE_LOWER:
        for a in range(size):
            if v[a] + v[full ^ a] > scale:
                return a, full ^ a
        return None
    if kind == SELF_CONJUGATE_PRECISE:
        for a in range(size):
            if v[a] + v[full ^ a] != scale:
                return a, full ^ a
        return None
    for a in range(size):
        va = v[a]
        for b in range(a, size):
            vb = v[b]
            if kind == TWO_MONOTONE:
                bad = v[a | b] + v[a & b] < va + vb
            elif kind == TWO_ALTERNATING:
                bad = v[a | b] + v[a & b] > va + vb
            elif kind == SUBADDITIVE:
                bad = v[a | b] > va + vb
            elif kind == SUPERADDITIVE:
                bad = not a & b and v[a | b] < va + vb
            elif kind == QUASI_SUPERADDITIVE:
                bad = scale + v[a & b] < va + vb
            elif kind == UPPER_SUPERADDITIVE:
                bad = (a | b) == full and va + vb < scale + v[a & b]
            elif kind == ADDITIVE:
                bad = not a & b and v[a | b] != va + vb
            else:
                raise ValueError(f"unknown scan kind {kind}")
            if bad:
                return a, b
    return None
