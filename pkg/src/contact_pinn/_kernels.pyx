# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Fused tanh-layer kernels (compiled).

Same contract as ``_kernels_py``: one pass over memory per call instead of
the several temporaries numpy needs.
"""

import numpy as np


def act_forward(double[:, ::1] zs, Py_ssize_t n, double[:, ::1] hs,
                double[:, ::1] s):
    cdef Py_ssize_t i, j, k, w = zs.shape[1]
    cdef Py_ssize_t nk = zs.shape[0] // n
    cdef double a, sv
    # numpy's vectorised tanh beats scalar libm by ~4x
    np.tanh(np.asarray(zs[:n]), out=np.asarray(hs[:n]))
    with nogil:
        for i in range(n):
            for j in range(w):
                a = hs[i, j]
                sv = 1.0 - a * a
                s[i, j] = sv
                for k in range(1, nk):
                    hs[k * n + i, j] = zs[k * n + i, j] * sv


def act_backward(double[:, ::1] gs, double[:, ::1] hs, double[:, ::1] s,
                 double[:, ::1] zs, Py_ssize_t n, double[:, ::1] out):
    cdef Py_ssize_t i, j, k, w = zs.shape[1]
    cdef Py_ssize_t nk = zs.shape[0] // n
    cdef double acc, sv, g
    with nogil:
        for i in range(n):
            for j in range(w):
                sv = s[i, j]
                acc = 0.0
                for k in range(1, nk):
                    g = gs[k * n + i, j]
                    acc = acc + g * zs[k * n + i, j]
                    out[k * n + i, j] = g * sv
                out[i, j] = sv * (gs[i, j] - 2.0 * hs[i, j] * acc)
