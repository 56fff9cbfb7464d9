# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled curvature assembly kernels (hot path of grid verification).

Semantics match gqelab._kernels_py exactly; see that module for formulas.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def conformal_ricci(double phi, double[::1] gphi, double[:, ::1] hphi):
    cdef Py_ssize_t n = gphi.shape[0]
    cdef cnp.ndarray[double, ndim=2] out = np.empty((n, n))
    cdef double[:, ::1] ric = out
    cdef double lap = 0.0, grad2 = 0.0, diag, scale
    cdef Py_ssize_t i, j
    for i in range(n):
        lap += hphi[i, i]
        grad2 += gphi[i] * gphi[i]
    diag = lap / phi - (n - 1.0) * grad2 / (phi * phi)
    scale = (n - 2.0) / phi
    for i in range(n):
        for j in range(n):
            ric[i, j] = scale * hphi[i, j]
        ric[i, i] += diag
    return out


def conformal_christoffel(double phi, double[::1] gphi):
    cdef Py_ssize_t n = gphi.shape[0]
    cdef cnp.ndarray[double, ndim=3] out = np.zeros((n, n, n))
    cdef double[:, :, ::1] gamma = out
    cdef Py_ssize_t i, j, k
    for i in range(n):
        for j in range(n):
            gamma[j, i, j] -= gphi[i] / phi
            gamma[i, i, j] -= gphi[j] / phi
        for k in range(n):
            gamma[k, i, i] += gphi[k] / phi
    return out


def conformal_hessian(double phi, double[::1] gphi, double[::1] gf, double[:, ::1] hf):
    cdef Py_ssize_t n = gphi.shape[0]
    cdef cnp.ndarray[double, ndim=2] out = np.empty((n, n))
    cdef double[:, ::1] hess = out
    cdef double dot = 0.0
    cdef Py_ssize_t i, j
    for i in range(n):
        dot += gf[i] * gphi[i]
    for i in range(n):
        for j in range(n):
            hess[i, j] = hf[i, j] + (gf[i] * gphi[j] + gphi[i] * gf[j]) / phi
        hess[i, i] -= dot / phi
    return out


def gqe_residual(double phi, double[::1] gphi, double[:, ::1] hphi,
                 double[::1] gf, double[:, ::1] hf, double nu, double lam):
    cdef Py_ssize_t n = gphi.shape[0]
    cdef cnp.ndarray[double, ndim=2] out = np.empty((n, n))
    cdef double[:, ::1] res = out
    cdef double lap = 0.0, grad2 = 0.0, dot = 0.0, diag, scale, gdiag
    cdef Py_ssize_t i, j
    for i in range(n):
        lap += hphi[i, i]
        grad2 += gphi[i] * gphi[i]
        dot += gf[i] * gphi[i]
    diag = lap / phi - (n - 1.0) * grad2 / (phi * phi)
    scale = (n - 2.0) / phi
    gdiag = lam / (phi * phi)
    for i in range(n):
        for j in range(n):
            res[i, j] = (scale * hphi[i, j]
                         + hf[i, j] + (gf[i] * gphi[j] + gphi[i] * gf[j]) / phi
                         - nu * gf[i] * gf[j])
        res[i, i] += diag - dot / phi - gdiag
    return out
