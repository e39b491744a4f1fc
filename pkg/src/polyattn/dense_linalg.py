"""Dense double-precision kernels shared by every engine.

Matrices are plain ``numpy.ndarray`` objects of dtype float64.  Products use
a fixed index-increasing summation order so repeated runs, and the two
kernel backends, give bitwise identical results.  No max-subtraction is
applied anywhere in this module.
"""
from __future__ import annotations

import io
import os

import numpy as np

from . import _backend
from .errors import ExponentOverflowError, ShapeError

EXP_LIMIT = 709.0


def as_matrix(A, name="matrix") -> np.ndarray:
    """Validate and return a C-contiguous float64 2-D array."""
    M = np.ascontiguousarray(A, dtype=np.float64)
    if M.ndim == 1:
        M = M.reshape(-1, 1)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise ShapeError(f"{name} must be a non-empty 2-D matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ShapeError(f"{name} contains NaN or Inf")
    return M


def matmul(A, B, backend=None) -> np.ndarray:
    A = np.ascontiguousarray(A, dtype=np.float64)
    B = np.ascontiguousarray(B, dtype=np.float64)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0]:
        raise ShapeError(f"matmul: cannot multiply {A.shape} by {B.shape}")
    return (backend or _backend.active).matmul(A, B)


def hadamard(A, B) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape != B.shape:
        raise ShapeError(f"hadamard: shapes {A.shape} and {B.shape} differ")
    return A * B


def rowwise_kron(A, B) -> np.ndarray:
    """Row ``i*m + j`` (0-based) is ``A[i] * B[j]``."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[1]:
        raise ShapeError(f"rowwise_kron: column counts of {A.shape} and {B.shape} differ")
    return (A[:, None, :] * B[None, :, :]).reshape(A.shape[0] * B.shape[0], A.shape[1])


def entrywise_exp(A, scale=1.0) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    X = A * scale
    top = float(X.max()) if X.size else 0.0
    if top > EXP_LIMIT:
        raise ExponentOverflowError(top, where="entrywise_exp: scaled entry")
    return np.exp(X)


def gram_exp(A, B, d_scale) -> np.ndarray:
    """``[A B^T / d_scale]^e`` with the deterministic product."""
    G = matmul(A, np.ascontiguousarray(np.asarray(B, dtype=np.float64).T))
    return entrywise_exp(G, 1.0 / d_scale)


def diag_of_chain(Ms, backend=None) -> np.ndarray:
    """Diagonal of ``M1 @ M2 @ ... @ Mq`` for square n x n factors.

    The first ``q - 1`` factors are multiplied out; the last contributes only
    through ``sum_j P[i, j] * Mq[j, i]``.
    """
    if len(Ms) < 2:
        raise ShapeError("diag_of_chain needs at least two factors")
    Ms = [np.ascontiguousarray(M, dtype=np.float64) for M in Ms]
    n = Ms[0].shape[0]
    for M in Ms:
        if M.shape != (n, n):
            raise ShapeError(f"diag_of_chain: expected {n}x{n} factors, got {M.shape}")
    be = backend or _backend.active
    P = Ms[0]
    for M in Ms[1:-1]:
        P = be.matmul(P, M)
    return be.diag_pair(P, Ms[-1])


def read_csv(path) -> np.ndarray:
    with open(path) as fh:
        text = fh.read()
    rows = [line for line in text.splitlines() if line.strip()]
    if not rows:
        raise ShapeError(f"{path}: empty matrix file")
    try:
        M = np.loadtxt(io.StringIO("\n".join(rows)), delimiter=",", ndmin=2, dtype=np.float64)
    except ValueError as exc:
        raise ShapeError(f"{path}: {exc}") from exc
    return as_matrix(M, name=os.fspath(path))


def write_csv(path, M) -> None:
    np.savetxt(path, np.atleast_2d(M), delimiter=",", fmt="%.17g")
