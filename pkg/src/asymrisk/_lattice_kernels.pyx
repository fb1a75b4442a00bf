"""Compiled lattice stepping kernels.

Mirrors asymrisk._lattice_python operation-for-operation; the two backends
must stay bit-identical. The build disables FP contraction so the scalar
loop below rounds exactly like the numpy elementwise pipeline.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def step_2d(double[:, ::1] y_next, double g1, double g2, double dt, double sqrt_dt):
    """One backward step of the two-driver lattice; see the numpy twin."""
    cdef Py_ssize_t m = y_next.shape[0] - 1
    y_arr = np.empty((m, m), dtype=np.float64)
    z1_arr = np.empty((m, m), dtype=np.float64)
    z2_arr = np.empty((m, m), dtype=np.float64)
    z12_arr = np.empty((m, m), dtype=np.float64)
    cdef double[:, ::1] y = y_arr
    cdef double[:, ::1] z1 = z1_arr
    cdef double[:, ::1] z2 = z2_arr
    cdef double[:, ::1] z12 = z12_arr
    cdef double q = 0.25 / sqrt_dt
    cdef double qc = 0.25 / dt
    cdef Py_ssize_t i, j
    cdef double a, b, c, d, s0, s1, e0, e1, v1, v2
    for i in range(m):
        for j in range(m):
            a = y_next[i, j]
            b = y_next[i + 1, j]
            c = y_next[i, j + 1]
            d = y_next[i + 1, j + 1]
            s0 = a + c
            s1 = b + d
            e0 = a + b
            e1 = c + d
            v1 = q * (s1 - s0)
            v2 = q * (e1 - e0)
            z1[i, j] = v1
            z2[i, j] = v2
            z12[i, j] = qc * ((a + d) - (b + c))
            y[i, j] = 0.25 * (s0 + s1) + (g1 * (v1 * v1) + g2 * (v2 * v2)) * dt
    return y_arr, z1_arr, z2_arr, z12_arr


def step_1d(double[::1] y_next, double g, double dt, double sqrt_dt):
    """One backward step of the single-driver lattice; see the numpy twin."""
    cdef Py_ssize_t m = y_next.shape[0] - 1
    y_arr = np.empty(m, dtype=np.float64)
    z_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] y = y_arr
    cdef double[::1] z = z_arr
    cdef double q = 0.5 / sqrt_dt
    cdef Py_ssize_t i
    cdef double lo, hi, v
    for i in range(m):
        lo = y_next[i]
        hi = y_next[i + 1]
        v = q * (hi - lo)
        z[i] = v
        y[i] = 0.5 * (lo + hi) + g * (v * v) * dt
    return y_arr, z_arr
