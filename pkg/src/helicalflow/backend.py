"""Kernel backend selection: compiled extension when available, numpy otherwise.

Set HELICALFLOW_PURE_PYTHON=1 to force the numpy fallback (useful for
benchmarking and for debugging suspected kernel issues).
"""

import os

if os.environ.get("HELICALFLOW_PURE_PYTHON"):
    from . import _accel_np as _impl

    BACKEND = "python"
else:
    try:
        from . import _accel as _impl

        BACKEND = "cython"
    except ImportError:
        from . import _accel_np as _impl

        BACKEND = "python"

rk4_stage = _impl.rk4_stage
rk4_combine = _impl.rk4_combine
cover_count = _impl.cover_count


def backend_name():
    return BACKEND
