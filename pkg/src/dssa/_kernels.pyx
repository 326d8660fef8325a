# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled fitness hot loops; same contracts as dssa._kernels_py.

The magnitude/phase error sum is not here: its cost is log10/atan2, which
numpy evaluates vectorized faster than a scalar libm loop.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, isfinite, INFINITY

cnp.import_array()


def term_coefficients(const signed char[:, :, ::1] S, const signed char[:, ::1] TS,
                      const double[:, ::1] X):
    cdef Py_ssize_t P = S.shape[0], T = S.shape[1], K = S.shape[2], D = X.shape[0]
    cdef Py_ssize_t p, t, k, d
    cdef double prod
    cdef signed char sel
    coef_arr = np.zeros((P, D))
    mag_arr = np.zeros((P, D))
    cdef double[:, ::1] coef = coef_arr
    cdef double[:, ::1] mag = mag_arr
    for p in range(P):
        for t in range(T):
            sel = TS[p, t]
            if sel == 0:
                continue
            for d in range(D):
                prod = 1.0
                for k in range(K):
                    if S[p, t, k]:
                        prod *= X[d, k]
                coef[p, d] += sel * prod
                mag[p, d] += prod
    return coef_arr, mag_arr


def greedy_match(const double complex[:, ::1] simp, const double complex[:, ::1] exact,
                 const double[:, ::1] scale):
    cdef Py_ssize_t D = exact.shape[0], ne = exact.shape[1], ns = simp.shape[1]
    cdef Py_ssize_t d, i, j, bi, bj, step, nfin
    cdef double best, r, dr, di
    cdef double[:, ::1] rel
    cdef char[::1] used_s, used_e
    errs_arr = np.ones((D, ne))
    cdef double[:, ::1] errs = errs_arr
    if ne == 0 or ns == 0:
        return errs_arr
    rel_arr = np.empty((ns, ne))
    rel = rel_arr
    us_arr = np.zeros(ns, dtype=np.int8)
    ue_arr = np.zeros(ne, dtype=np.int8)
    used_s = us_arr
    used_e = ue_arr
    for d in range(D):
        nfin = 0
        for i in range(ns):
            used_s[i] = 0
            if isfinite(simp[d, i].real) and isfinite(simp[d, i].imag):
                nfin += 1
            else:
                used_s[i] = 1
            for j in range(ne):
                dr = simp[d, i].real - exact[d, j].real
                di = simp[d, i].imag - exact[d, j].imag
                rel[i, j] = sqrt(dr * dr + di * di) / scale[d, j]
        for j in range(ne):
            used_e[j] = 0
        for step in range(min(nfin, ne)):
            best = INFINITY
            bi = -1
            bj = -1
            for i in range(ns):
                if used_s[i]:
                    continue
                for j in range(ne):
                    if used_e[j]:
                        continue
                    r = rel[i, j]
                    if r < best:
                        best = r
                        bi = i
                        bj = j
            if bi < 0:
                break
            used_s[bi] = 1
            used_e[bj] = 1
            errs[d, bj] = best
    return errs_arr
