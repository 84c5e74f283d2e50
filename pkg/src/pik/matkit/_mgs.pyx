# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled prioritized Gram-Schmidt kernel.

Mirrors ``pik.matkit._mgs_py.factorize`` operation for operation; the two
implementations must stay interchangeable.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

COMPILED = True


def factorize(cnp.ndarray[cnp.float64_t, ndim=2] J, double rank_tol):
    """Row-wise prioritized MGS; see the fallback module for the contract."""
    cdef Py_ssize_t m = J.shape[0]
    cdef Py_ssize_t n = J.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] C = np.zeros((m, m))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Q = np.zeros((m, n))
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] dep = np.zeros(m, dtype=np.uint8)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.zeros(n)
    cdef double[:, ::1] Jv = np.ascontiguousarray(J)
    cdef double[:, ::1] Cv = C
    cdef double[:, ::1] Qv = Q
    cdef double[::1] vv = v
    cdef Py_ssize_t a, i, k, p
    cdef double norm0, c, r

    for a in range(m):
        norm0 = 0.0
        for k in range(n):
            vv[k] = Jv[a, k]
            norm0 += vv[k] * vv[k]
        norm0 = sqrt(norm0)
        for p in range(2):
            for i in range(a):
                if dep[i]:
                    continue
                c = 0.0
                for k in range(n):
                    c += Qv[i, k] * vv[k]
                Cv[a, i] += c
                for k in range(n):
                    vv[k] -= c * Qv[i, k]
        r = 0.0
        for k in range(n):
            r += vv[k] * vv[k]
        r = sqrt(r)
        if norm0 == 0.0 or r <= rank_tol * norm0:
            dep[a] = 1
        else:
            Cv[a, a] = r
            for k in range(n):
                Qv[a, k] = vv[k] / r
    return C, Q, dep.astype(bool)
