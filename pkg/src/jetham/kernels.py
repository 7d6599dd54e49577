"""Backend selection for the polynomial kernels.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
pure-Python ``_kernels_py`` module is loaded.  Setting ``JETHAM_PURE_PYTHON=1``
forces the fallback.
"""

import os

if os.environ.get("JETHAM_PURE_PYTHON", "") not in ("", "0"):
    from jetham import _kernels_py as _impl
else:
    try:
        from jetham import _ckernels as _impl
    except ImportError:
        from jetham import _kernels_py as _impl

BACKEND = _impl.BACKEND
normalize = _impl.normalize
mono_mul = _impl.mono_mul
poly_add = _impl.poly_add
poly_iadd = _impl.poly_iadd
poly_scale = _impl.poly_scale
poly_mul = _impl.poly_mul

DEFAULT_MAX_TERMS = 100_000


def max_terms():
    """Current term cap, read from ``JETHAM_MAX_TERMS``."""
    raw = os.environ.get("JETHAM_MAX_TERMS")
    if not raw:
        return DEFAULT_MAX_TERMS
    try:
        value = int(raw)
    except ValueError:
        return DEFAULT_MAX_TERMS
    return value if value > 0 else DEFAULT_MAX_TERMS
