# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled red-black projected SOR kernels for the gap LCP.

Unknown ``w >= 0`` on active nodes; Gauss-Seidel target
``gs = (sum of 4 neighbours + b) * inv_diag``; projected update
``w <- max(0, (1 - omega) w + omega gs)``.  Nodes of one colour only read
nodes of the other colour, so every colour pass is order independent.
"""

from cython.parallel cimport prange
from libc.math cimport fabs

import numpy as np


cdef inline void _half_sweep(double[:, ::1] w, const double[:, ::1] b,
                             const unsigned char[:, ::1] active, double omega,
                             double inv_diag, int color, int nthreads) noexcept nogil:
    cdef Py_ssize_t ny = w.shape[0]
    cdef Py_ssize_t nx = w.shape[1]
    cdef Py_ssize_t i, j, start
    cdef double gs, val
    for j in prange(1, ny - 1, nogil=True, num_threads=nthreads, schedule="static"):
        start = 1 + ((j + 1 + color) & 1)
        i = start
        while i < nx - 1:
            if active[j, i]:
                gs = (w[j, i - 1] + w[j, i + 1] + w[j - 1, i] + w[j + 1, i] + b[j, i]) * inv_diag
                val = (1.0 - omega) * w[j, i] + omega * gs
                w[j, i] = val if val > 0.0 else 0.0
            i = i + 2


def sweeps(double[:, ::1] w, const double[:, ::1] b, const unsigned char[:, ::1] active,
           double omega, double inv_diag, int count, int nthreads=1):
    """Run ``count`` full red-black sweeps in place."""
    cdef int it
    with nogil:
        for it in range(count):
            _half_sweep(w, b, active, omega, inv_diag, 0, nthreads)
            _half_sweep(w, b, active, omega, inv_diag, 1, nthreads)


def residual(const double[:, ::1] w, const double[:, ::1] b, const unsigned char[:, ::1] active,
             double inv_diag, int nthreads=1):
    """Max over active nodes of |max(0, gs) - w| (zero exactly at LCP solutions)."""
    cdef Py_ssize_t ny = w.shape[0]
    cdef Py_ssize_t nx = w.shape[1]
    cdef Py_ssize_t i, j
    cdef double gs, r, m
    row_max = np.zeros(ny, dtype=np.float64)
    cdef double[::1] rm = row_max
    for j in prange(1, ny - 1, nogil=True, num_threads=nthreads, schedule="static"):
        m = 0.0
        for i in range(1, nx - 1):
            if active[j, i]:
                gs = (w[j, i - 1] + w[j, i + 1] + w[j - 1, i] + w[j + 1, i] + b[j, i]) * inv_diag
                if gs < 0.0:
                    gs = 0.0
                r = fabs(gs - w[j, i])
                if r > m:
                    m = r
        rm[j] = m
    return float(row_max.max())
