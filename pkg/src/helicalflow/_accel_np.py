"""Pure-numpy fallback for the compiled kernels in ``_accel.pyx``.

Kept in lockstep with the Cython source: same names, same signatures,
same operation order (so results agree to the last bit on IEEE
hardware; the extension is built with FMA contraction disabled).
"""

import numpy as np


def rk4_stage(out, damp, u, coef, weight, n):
    """out = damp*u + coef*(weight*n), elementwise (weight may be None)."""
    if weight is None:
        out[...] = damp * u + coef * n
    else:
        out[...] = damp * u + coef * (weight * n)


def rk4_combine(out, e2, u, n1, e, n2, n3, n4, dt):
    """Final integrating-factor RK4 combination.

    out = e2*u + dt/6 * (e2*n1 + (2*e)*(n2 + n3) + n4)
    """
    c = dt / 6.0
    out[...] = e2 * u + c * (e2 * n1 + (2.0 * e) * (n2 + n3) + n4)


def cover_count(points, radius, cap):
    """Greedy leftmost-first count of radius-`radius` intervals covering `points`.

    `points` must be sorted ascending; returns early with cap+1 once the
    count exceeds `cap`.
    """
    n = 0
    i = 0
    m = points.shape[0]
    while i < m:
        n += 1
        if n > cap:
            return n
        i = int(np.searchsorted(points, points[i] + 2.0 * radius, side="right"))
    return n
