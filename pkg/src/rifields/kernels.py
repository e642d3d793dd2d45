"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``RIFIELDS_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the pure-Python twins are used. Both produce identical
results.
"""
import os

from . import _kernels_py

_FORCE_PY = os.environ.get("RIFIELDS_PURE_PYTHON", "") not in ("", "0")

if _FORCE_PY:
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _kernels_py
        BACKEND = "python"

lower_hull = _impl.lower_hull
legendre_max = _impl.legendre_max
greedy_cover = _impl.greedy_cover
greedy_packing = _impl.greedy_packing
ball_max = _impl.ball_max
nearest = _impl.nearest

__all__ = ["BACKEND", "lower_hull", "legendre_max", "greedy_cover",
           "greedy_packing", "ball_max", "nearest"]
