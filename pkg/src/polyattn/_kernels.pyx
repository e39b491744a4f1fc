# cython: language_level=3
"""Compiled hot loops.  ``_pure.py`` mirrors every function here."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()

NAME = "cython"


def matmul(double[:, ::1] A, double[:, ::1] B):
    cdef Py_ssize_t n = A.shape[0], m = A.shape[1], p = B.shape[1]
    cdef Py_ssize_t i, k, j
    cdef double a
    out = np.zeros((n, p), dtype=np.float64)
    cdef double[:, ::1] C = out
    # i-k-j order: each C[i, j] accumulates k = 0, 1, ... from 0.0
    for i in range(n):
        for k in range(m):
            a = A[i, k]
            for j in range(p):
                C[i, j] = C[i, j] + a * B[k, j]
    return out


def diag_pair(double[:, ::1] P, double[:, ::1] M):
    """diag(P @ M) without forming the product."""
    cdef Py_ssize_t n = P.shape[0], m = P.shape[1]
    cdef Py_ssize_t i, j
    cdef double acc
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(n):
        acc = 0.0
        for j in range(m):
            acc = acc + P[i, j] * M[j, i]
        o[i] = acc
    return out


cdef inline double _exponent(double[:, :, ::1] Q, Py_ssize_t[::1] idx,
                             long[::1] mvars, long[::1] mptr, Py_ssize_t d) nogil:
    cdef Py_ssize_t mono, c, q
    cdef double total = 0.0, acc, prod
    for mono in range(mptr.shape[0] - 1):
        acc = 0.0
        for c in range(d):
            prod = 1.0
            for q in range(mptr[mono], mptr[mono + 1]):
                prod = prod * Q[mvars[q], idx[mvars[q]], c]
            acc = acc + prod
        total = total + acc
    return total


def bruteforce_numden(double[:, :, ::1] Q, double[:, :, ::1] V,
                      long[::1] mvars, long[::1] mptr,
                      double d_scale, bint safe):
    """Direct nested summation for one (sub)polynomial.

    ``Q`` has shape (m, n, d) with local variable 0 as the query, ``V`` has
    shape (m - 1, n, d) for local variables 1..m-1.  Monomials are encoded
    CSR-style in ``mvars``/``mptr``.  Key tuples run in odometer order with
    local variable 1 most significant.

    Returns (num, den, shift, max_exponent); ``shift`` is the per-row value
    subtracted from exponents (all zeros unless ``safe``).
    """
    cdef Py_ssize_t m = Q.shape[0], n = Q.shape[1], d = Q.shape[2]
    cdef Py_ssize_t nk = m - 1
    cdef Py_ssize_t l1, c, j, pos
    cdef double e, w, rowmax, gmax = -1e308
    cdef double inv = 1.0 / d_scale
    num_a = np.zeros((n, d), dtype=np.float64)
    den_a = np.zeros(n, dtype=np.float64)
    shift_a = np.zeros(n, dtype=np.float64)
    cdef double[:, ::1] num = num_a
    cdef double[::1] den = den_a
    cdef double[::1] shift = shift_a
    idx_a = np.zeros(m, dtype=np.intp)
    cdef Py_ssize_t[::1] idx = idx_a
    prod_a = np.empty(d, dtype=np.float64)
    cdef double[::1] prod = prod_a
    cdef bint done

    for l1 in range(n):
        idx[0] = l1
        rowmax = -1e308
        if safe:
            for j in range(1, m):
                idx[j] = 0
            done = False
            while not done:
                e = _exponent(Q, idx, mvars, mptr, d) * inv
                if e > rowmax:
                    rowmax = e
                pos = nk
                done = True
                while pos >= 1:
                    idx[pos] += 1
                    if idx[pos] < n:
                        done = False
                        break
                    idx[pos] = 0
                    pos -= 1
            shift[l1] = rowmax
        for j in range(1, m):
            idx[j] = 0
        done = False
        while not done:
            e = _exponent(Q, idx, mvars, mptr, d) * inv
            if e > gmax:
                gmax = e
            w = exp(e - shift[l1])
            den[l1] = den[l1] + w
            for c in range(d):
                prod[c] = w
            for j in range(1, m):
                for c in range(d):
                    prod[c] = prod[c] * V[j - 1, idx[j], c]
            for c in range(d):
                num[l1, c] = num[l1, c] + prod[c]
            pos = nk
            done = True
            while pos >= 1:
                idx[pos] += 1
                if idx[pos] < n:
                    done = False
                    break
                idx[pos] = 0
                pos -= 1
    return num_a, den_a, shift_a, gmax
