"""Backend selection for the hot kernels.

The compiled extension is preferred. Setting ``HYPOGEO_PURE_PYTHON=1`` forces
the pure-Python fallback, as does a missing or broken build.
"""

import os

BACKEND = "python"

if os.environ.get("HYPOGEO_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from hypogeo import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        from hypogeo import _pykernels as _impl
else:
    from hypogeo import _pykernels as _impl

from hypogeo import _pykernels as python_impl  # noqa: E402

poly_mul_packed = _impl.poly_mul_packed
marching_squares = _impl.marching_squares


def poly_mul(keys_a, coefs_a, keys_b, coefs_b):
    """Packed product that falls back to exact big integers on int64 overflow."""
    if BACKEND == "cython":
        try:
            keys, coefs = _impl.poly_mul_packed(keys_a, coefs_a, keys_b, coefs_b)
            return keys, coefs.tolist()
        except OverflowError:
            pass
    return python_impl.poly_mul_packed(keys_a, coefs_a, keys_b, coefs_b)
