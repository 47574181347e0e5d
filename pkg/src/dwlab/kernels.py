"""Backend selection for the hot kernels.

The compiled extension is preferred; the numpy fallback is selected when the
extension is missing or when DWLAB_DISABLE_EXT is set (used by the benchmark
and by tests that cross-check the two implementations).
"""
import os

from . import _kernels_py

if os.environ.get("DWLAB_DISABLE_EXT"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

nonlinear_phase = _impl.nonlinear_phase
twomode_rk4 = _impl.twomode_rk4
