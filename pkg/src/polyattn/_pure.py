"""Numpy implementations of the compiled kernels (same signatures).

``matmul`` and ``diag_pair`` reproduce the compiled summation order exactly,
so both backends agree bitwise on them.  ``bruteforce_numden`` vectorizes
over key tuples and agrees to rounding error.
"""
import string

import numpy as np

NAME = "numpy"


def matmul(A, B):
    n, m = A.shape
    out = np.zeros((n, B.shape[1]), dtype=np.float64)
    for k in range(m):
        out += A[:, k, None] * B[None, k, :]
    return out


def diag_pair(P, M):
    n, m = P.shape
    out = np.zeros(n, dtype=np.float64)
    for j in range(m):
        out += P[:, j] * M[j, :n]
    return out


def _row_exponents(Q, l1, mvars, mptr, inv):
    """Exponent tensor over all key tuples for query row ``l1``; shape (n,)*(m-1)."""
    m, n, d = Q.shape
    nk = m - 1
    total = np.zeros((n,) * nk)
    for mono in range(len(mptr) - 1):
        prod = np.ones((1,) * nk + (d,))
        for v in mvars[mptr[mono]:mptr[mono + 1]]:
            if v == 0:
                prod = prod * Q[0, l1]
            else:
                shape = [1] * nk + [d]
                shape[v - 1] = n
                prod = prod * Q[v].reshape(shape)
        total = total + prod.sum(axis=-1)
    return total * inv


def bruteforce_numden(Q, V, mvars, mptr, d_scale, safe):
    m, n, d = Q.shape
    nk = m - 1
    inv = 1.0 / d_scale
    num = np.zeros((n, d))
    den = np.zeros(n)
    shift = np.zeros(n)
    gmax = -np.inf
    letters = string.ascii_letters
    key_axes = letters[:nk]
    col = letters[nk]
    spec = key_axes + "," + ",".join(f"{a}{col}" for a in key_axes) + "->" + col
    for l1 in range(n):
        e = _row_exponents(Q, l1, mvars, mptr, inv)
        emax = float(e.max()) if e.size else 0.0
        gmax = max(gmax, emax)
        if safe:
            shift[l1] = emax
        with np.errstate(over="ignore"):
            w = np.exp(e - shift[l1])
        den[l1] = w.sum()
        if nk:
            num[l1] = np.einsum(spec, w, *[V[j] for j in range(nk)])
        else:
            num[l1] = w
    return num, den, shift, gmax
