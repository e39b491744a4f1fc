"""Entry-wise approximation of poly-attention by the polynomial method.

``exp`` is replaced by a Taylor polynomial on a bounded interval, which turns
each exponentiated Gram matrix into a product of two thin matrices.  Features
are indexed by multisets ``J`` of coordinates; the weight of ``J`` in the
expansion of ``P(<a, b>/d_scale)`` is ``1 / (prod_c J_c! * d_scale^|J|)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from itertools import combinations_with_replacement

import numpy as np

from .dense_linalg import matmul
from .errors import AdmissibilityError, BudgetError, ShapeError
from .exact_engines import AttentionInputs, AttentionOutput, attend_tree
from .poly_core import AttentionPolynomial

DEGREE_CAP = 64
RANK_CAP = 20000


@dataclass(frozen=True)
class ExpPolynomial:
    """Truncated Taylor series of ``exp`` with a certified relative error on ``[-radius, radius]``."""

    coefficients: tuple
    valid_radius: float
    rel_error: float

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        for c in reversed(self.coefficients):
            out = out * x + c
        return out


def taylor_remainder_log(gamma: float, degree: int) -> float:
    """log of ``e^gamma * gamma^(m+1) / (m+1)!`` for ``m = degree``."""
    if gamma == 0:
        return -math.inf
    m1 = degree + 1
    return gamma + m1 * math.log(gamma) - math.lgamma(m1 + 1)


def exp_approx_poly(gamma_bound: float, eps: float, degree_cap: int = DEGREE_CAP) -> ExpPolynomial:
    """Smallest-degree Taylor polynomial ``P`` with ``|P(a) - e^a| <= eps e^a`` for ``|a| <= gamma_bound``.

    Parameters
    ----------
    gamma_bound : float
        Radius of the interval, must be non-negative.
    eps : float
        Target relative error in ``(0, 0.1)``.
    degree_cap : int
        Largest degree tried before giving up.

    Raises
    ------
    AdmissibilityError
        If no degree up to ``degree_cap`` certifies the bound.

    Examples
    --------
    >>> exp_approx_poly(0.0, 1e-6).coefficients
    (1.0,)
    """
    gamma_bound = float(gamma_bound)
    if not gamma_bound >= 0 or not math.isfinite(gamma_bound):
        raise ShapeError(f"radius must be finite and >= 0, got {gamma_bound}")
    if not 0 < eps < 0.1:
        raise ShapeError(f"eps must lie in (0, 0.1), got {eps}")
    target = math.log(eps) - gamma_bound
    for deg in range(degree_cap + 1):
        if taylor_remainder_log(gamma_bound, deg) <= target:
            coeffs = tuple(1.0 / math.factorial(k) for k in range(deg + 1))
            return ExpPolynomial(coeffs, gamma_bound, float(eps))
    raise AdmissibilityError(
        f"exp polynomial for radius {gamma_bound:.4g} at eps={eps:g} needs degree > {degree_cap}; "
        "shrink the entries or raise eps")


def multisets(dim: int, degree: int) -> list[tuple[int, ...]]:
    """All sorted coordinate multisets of size ``<= degree``, by size then lexicographically."""
    out = []
    for k in range(degree + 1):
        out.extend(combinations_with_replacement(range(dim), k))
    return out


def multiset_weight(J, scale: float) -> float:
    counts = np.bincount(J) if J else np.zeros(0, dtype=int)
    denom = 1.0
    for c in counts:
        denom *= math.factorial(int(c))
    return 1.0 / (denom * scale ** len(J))


def monomial_features(X, degree: int):
    """Columns ``prod_{c in J} X[:, c]`` for every multiset ``J`` of size ``<= degree``.

    Returns the ``n x r`` feature matrix and the multiset list.
    """
    X = np.asarray(X, dtype=np.float64)
    n, dim = X.shape
    Js = multisets(dim, degree)
    col = {(): 0}
    F = np.empty((n, len(Js)))
    F[:, 0] = 1.0
    for idx, J in enumerate(Js[1:], start=1):
        F[:, idx] = F[:, col[J[:-1]]] * X[:, J[-1]]
        col[J] = idx
    return F, Js


def feature_rank(dim: int, degree: int) -> int:
    return math.comb(dim + degree, degree)


@dataclass
class LowRankFactors:
    U: np.ndarray
    W: np.ndarray
    r: int
    poly: ExpPolynomial

    def materialize(self) -> np.ndarray:
        return matmul(self.U, np.ascontiguousarray(self.W.T))


def _maxabs(M) -> float:
    return float(np.max(np.abs(M))) if np.size(M) else 0.0


def lowrank_exp_factor(A, B, d_scale: float, eps: float, rank_cap: int = RANK_CAP) -> LowRankFactors:
    """Factor ``exp(A B^T / d_scale)`` as ``U W^T`` with entry-wise relative error ``eps``.

    The radius is the worst-case bound ``d * max|A| * max|B| / d_scale``.
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[1]:
        raise ShapeError(f"lowrank_exp_factor: incompatible shapes {A.shape}, {B.shape}")
    d = A.shape[1]
    gamma = d * _maxabs(A) * _maxabs(B) / d_scale
    poly = exp_approx_poly(gamma, eps)
    r = feature_rank(d, poly.degree)
    if r > rank_cap:
        raise BudgetError(f"feature rank {r} exceeds cap {rank_cap}")
    FA, Js = monomial_features(A, poly.degree)
    FB, _ = monomial_features(B, poly.degree)
    root = np.sqrt([multiset_weight(J, d_scale) for J in Js])
    return LowRankFactors(FA * root, FB * root, r, poly)


class LowRankEdge:
    """Edge operator ``M -> U (W^T M)`` standing in for ``[Q_u Q_v^T / d_scale]^e``."""

    def __init__(self, A, B, d_scale, eps):
        self.f = lowrank_exp_factor(A, B, d_scale, eps)

    def apply(self, M):
        return matmul(self.f.U, matmul(np.ascontiguousarray(self.f.W.T), M))


STRASSEN_TERMS = [(1, 2), (1, 3), (2, 3)]


def attend_strassen_approx(inp: AttentionInputs, eps: float) -> AttentionOutput:
    """Near-linear approximation for ``x1x2 + x1x3 + x2x3``.

    With ``X ~ U1 W1^T`` (edge 1-2), ``Y ~ U2 W2^T`` (edge 2-3) and
    ``Z ~ U3 W3^T`` (edge 3-1), row ``i`` of the denominator is
    ``U1_i (W1^T U2)(W2^T U3) W3_i^T`` and each numerator column inserts the
    value diagonals between the factors.
    """
    if inp.h.terms != STRASSEN_TERMS or inp.t != 3:
        raise AdmissibilityError(f"Strassen approximation needs x1*x2+x1*x3+x2*x3, got {inp.h}")
    ds = inp.d_scale
    f1 = lowrank_exp_factor(inp.q(1), inp.q(2), ds, eps)
    f2 = lowrank_exp_factor(inp.q(2), inp.q(3), ds, eps)
    f3 = lowrank_exp_factor(inp.q(3), inp.q(1), ds, eps)
    W1t = np.ascontiguousarray(f1.W.T)
    W2t = np.ascontiguousarray(f2.W.T)
    U1, W3 = f1.U, f3.W

    def quad(inner):
        return np.sum(matmul(U1, inner) * W3, axis=1)

    R = quad(matmul(matmul(W1t, f2.U), matmul(W2t, f3.U)))
    V2, V3 = inp.v(2), inp.v(3)
    num = np.empty((inp.n, inp.d))
    for col in range(inp.d):
        left = matmul(W1t * V2[:, col][None, :], f2.U)
        right = matmul(W2t * V3[:, col][None, :], f3.U)
        num[:, col] = quad(matmul(left, right))
    return AttentionOutput(num / R[:, None], "approx-lowrank", R)


def attend_tree_approx(inp: AttentionInputs, eps: float) -> AttentionOutput:
    """Tree algorithm with every exponentiated Gram matrix replaced by its low-rank factors."""
    return attend_tree(inp, edge_factory=partial(LowRankEdge, eps=eps), engine="approx-lowrank")


@dataclass
class TensorReduction:
    h: AttentionPolynomial
    K: list
    Wv: list
    d: int

    @property
    def s(self) -> int:
        return self.h.s

    @property
    def n(self) -> int:
        return self.K[0].shape[0]


def reduce_to_tensor(inp: AttentionInputs) -> TensorReduction:
    """Rewrite ``h`` as one order-``t`` inner product over ``s*d`` coordinates.

    Block ``i`` of ``K^(j)`` is ``Q^(j)`` when ``x_j`` occurs in monomial
    ``i`` and all ones otherwise.
    """
    n, d = inp.n, inp.d
    K = []
    for j in range(1, inp.t + 1):
        blocks = [inp.q(j) if j in m.vars else np.ones((n, d)) for m in inp.h.monomials]
        K.append(np.hstack(blocks))
    width = K[0].shape[1]
    Wv = []
    for j in range(2, inp.t + 1):
        W = np.zeros((n, width))
        W[:, :d] = inp.v(j)
        Wv.append(W)
    return TensorReduction(inp.h, K, Wv, d)


def tensor_radius(red: TensorReduction, d_scale: float) -> float:
    """Rigorous bound on ``|<K1_a, K2_b * ... * Kt_z>| / d_scale`` over all tuples."""
    col_max = np.prod([np.max(np.abs(K), axis=0) for K in red.K], axis=0)
    return float(np.sum(col_max)) / d_scale


def attend_tensor_approx(red: TensorReduction, eps: float, d_scale: float,
                         rank_cap: int = RANK_CAP) -> AttentionOutput:
    """Feature expansion of ``exp`` over the reduced order-``t`` inner product.

    The query side carries the multiset weights; each key side contributes
    ``Phi_j^T Wv_j``, and those ``r x d`` summaries multiply entry-wise.
    """
    gamma = tensor_radius(red, d_scale)
    poly = exp_approx_poly(gamma, eps)
    dim = red.K[0].shape[1]
    r = feature_rank(dim, poly.degree)
    if r > rank_cap:
        raise BudgetError(f"feature rank {r} exceeds cap {rank_cap} (width {dim}, degree {poly.degree})")
    F1, Js = monomial_features(red.K[0], poly.degree)
    F1 = F1 * np.array([multiset_weight(J, d_scale) for J in Js])
    d = red.d
    S = np.ones((r, d))
    Sden = np.ones((r, 1))
    ones = np.ones((red.n, 1))
    for Kj, Wj in zip(red.K[1:], red.Wv):
        Fj, _ = monomial_features(Kj, poly.degree)
        Fjt = np.ascontiguousarray(Fj.T)
        S = S * matmul(Fjt, np.ascontiguousarray(Wj[:, :d]))
        Sden = Sden * matmul(Fjt, ones)
    num = matmul(F1, S)
    den = matmul(F1, Sden)[:, 0]
    return AttentionOutput(num / den[:, None], "approx-tensor", den)


def admissible_approx_engines(h: AttentionPolynomial) -> list[str]:
    from .poly_core import is_forest

    out = []
    if (h.terms == STRASSEN_TERMS and h.t == 3) or is_forest(h):
        out.append("approx-lowrank")
    out.append("approx-tensor")
    return out


def attend_approx(inp: AttentionInputs, engine: str, eps: float) -> AttentionOutput:
    if engine == "approx-tensor":
        return attend_tensor_approx(reduce_to_tensor(inp), eps, inp.d_scale)
    if engine == "approx-lowrank":
        if inp.h.terms == STRASSEN_TERMS and inp.t == 3:
            return attend_strassen_approx(inp, eps)
        return attend_tree_approx(inp, eps)
    raise ShapeError(f"unknown approximate engine {engine!r}")
