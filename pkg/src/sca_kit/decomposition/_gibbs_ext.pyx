# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Gibbs factor update. Mirrors ``_gibbs_py.sample_factor``."""

from libc.math cimport log, sqrt
from scipy.special.cython_special cimport log_ndtr, ndtri_exp

cdef double TINY = 1e-300


cdef inline double rectified(double mu, double sd, double u) nogil:
    cdef double a = -mu / sd
    cdef double z = -ndtri_exp(log(u) + log_ndtr(-a))
    cdef double x
    if z < a:
        z = a
    x = mu + sd * z
    if x > 0.0:
        return x
    return 0.0


def sample_factor(double[:, ::1] X, const double[:, ::1] B, const double[:, ::1] G,
                  double sigma2, const double[:, ::1] rate, const double[:, ::1] U):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t C = X.shape[1]
    cdef Py_ssize_t i, k, c
    cdef double nrm, sd, acc, mu
    with nogil:
        for c in range(C):
            nrm = G[c, c]
            if nrm <= TINY:
                for i in range(n):
                    X[i, c] = -log(U[i, c]) / rate[i, c]
                continue
            sd = sqrt(sigma2 / nrm)
            for i in range(n):
                acc = 0.0
                for k in range(C):
                    if k != c:
                        acc = acc + X[i, k] * G[k, c]
                mu = (B[i, c] - acc - rate[i, c] * sigma2) / nrm
                X[i, c] = rectified(mu, sd, U[i, c])
