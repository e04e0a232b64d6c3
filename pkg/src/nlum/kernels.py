"""Kernel selection: compiled extension when importable, pure Python otherwise.

Set ``NLUM_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels as python_kernels

compiled_kernels = None
if not os.environ.get("NLUM_PURE_PYTHON"):
    try:
        from . import _ckernels as compiled_kernels
    except ImportError:
        compiled_kernels = None

BACKEND = "cython" if compiled_kernels is not None else "python"

OPTIMAL = python_kernels.OPTIMAL
UNBOUNDED = python_kernels.UNBOUNDED


def bland(rows, basis, det, eligible, max_pivots, backend=None):
    """Run the simplex loop, falling back to Python integers on 64-bit overflow."""
    use = backend or BACKEND
    if use == "cython" and compiled_kernels is not None:
        try:
            return compiled_kernels.bland(rows, basis, det, eligible, max_pivots)
        except OverflowError:
            pass
    return python_kernels.bland(rows, basis, det, eligible, max_pivots)


def scan_pairs(values, n, kind, scale, backend=None):
    use = backend or BACKEND
    if use == "cython" and compiled_kernels is not None:
        try:
            return compiled_kernels.scan_pairs(values, n, kind, scale)
        except OverflowError:
            pass
    return python_kernels.scan_pairs(values, n, kind, scale)
