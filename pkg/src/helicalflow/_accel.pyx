# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the stepping hot loop and the interval-cover scan.

Signatures mirror ``_accel_np`` exactly; the backend selector picks one of
the two at import time.
"""


def rk4_stage(double complex[::1] out, double[::1] damp, double complex[::1] u,
              double coef, weight, double complex[::1] n):
    """out = damp*u + coef*(weight*n), elementwise (weight may be None)."""
    cdef Py_ssize_t i, m = out.shape[0]
    cdef double[::1] w
    if weight is None:
        for i in range(m):
            out[i] = damp[i] * u[i] + coef * n[i]
    else:
        w = weight
        for i in range(m):
            out[i] = damp[i] * u[i] + coef * (w[i] * n[i])


def rk4_combine(double complex[::1] out, double[::1] e2, double complex[::1] u,
                double complex[::1] n1, double[::1] e, double complex[::1] n2,
                double complex[::1] n3, double complex[::1] n4, double dt):
    """Final integrating-factor RK4 combination.

    out = e2*u + dt/6 * (e2*n1 + (2*e)*(n2 + n3) + n4)
    """
    cdef Py_ssize_t i, m = out.shape[0]
    cdef double c = dt / 6.0
    for i in range(m):
        out[i] = e2[i] * u[i] + c * (e2[i] * n1[i] + (2.0 * e[i]) * (n2[i] + n3[i]) + n4[i])


def cover_count(double[::1] points, double radius, long cap):
    """Greedy leftmost-first count of radius-`radius` intervals covering `points`.

    `points` must be sorted ascending; returns early with cap+1 once the
    count exceeds `cap`.
    """
    cdef Py_ssize_t i = 0, m = points.shape[0]
    cdef long n = 0
    cdef double end
    while i < m:
        n += 1
        if n > cap:
            return n
        end = points[i] + 2.0 * radius
        while i < m and points[i] <= end:
            i += 1
    return n
