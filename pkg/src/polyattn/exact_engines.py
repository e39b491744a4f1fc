"""Exact poly-attention engines.

Every engine works on numerator/denominator pairs with raw exponentials.
A *component* is a sub-polynomial together with the variable whose rows it is
indexed by (its query).  Components that do not contain ``x1`` are summed
over their query rows as well, which yields a factor shared by all output
rows; the final output is the entry-wise product of all component numerators
divided by the product of their denominators.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .dense_linalg import EXP_LIMIT, as_matrix, gram_exp, matmul
from .errors import AdmissibilityError, BudgetError, ExponentOverflowError, PolyAttnError, ShapeError
from .poly_core import (
    GENERAL,
    SINGLE_CYCLE,
    TREE_FOREST,
    AttentionPolynomial,
    _pure_cycle,
    build_structure,
    graph_of,
    is_forest,
    relabel,
    separate_variables,
)

DEFAULT_BUDGET = 10**8


def brute_force_budget() -> int:
    raw = os.environ.get("POLYATTN_BUDGET")
    return int(float(raw)) if raw else DEFAULT_BUDGET


@dataclass
class AttentionInputs:
    """Query-key matrices ``Q[0..t-1]`` (``Q[0]`` is the query) and value
    matrices ``V[0..t-2]`` for variables ``x2..xt``."""

    h: AttentionPolynomial
    Q: list
    V: list
    d_scale: float | None = None

    def __post_init__(self):
        if self.h.t < 2:
            raise ShapeError("poly-attention needs t >= 2")
        if len(self.Q) != self.h.t:
            raise ShapeError(f"expected {self.h.t} query-key matrices, got {len(self.Q)}")
        if len(self.V) != self.h.t - 1:
            raise ShapeError(f"expected {self.h.t - 1} value matrices, got {len(self.V)}")
        self.Q = [as_matrix(M, f"Q{j + 1}") for j, M in enumerate(self.Q)]
        self.V = [as_matrix(M, f"V{j + 2}") for j, M in enumerate(self.V)]
        shape = self.Q[0].shape
        for M in self.Q + self.V:
            if M.shape != shape:
                raise ShapeError(f"all matrices must be {shape}, found {M.shape}")
        if self.d_scale is None:
            self.d_scale = float(shape[1])
        self.d_scale = float(self.d_scale)
        if not self.d_scale > 0:
            raise ShapeError("d_scale must be positive")

    @property
    def n(self) -> int:
        return self.Q[0].shape[0]

    @property
    def d(self) -> int:
        return self.Q[0].shape[1]

    @property
    def t(self) -> int:
        return self.h.t

    def q(self, j: int) -> np.ndarray:
        return self.Q[j - 1]

    def v(self, j: int) -> np.ndarray:
        return self.V[j - 2]

    def restrict(self, sub: AttentionPolynomial) -> "AttentionInputs":
        """Inputs for ``sub`` alone: its variables relabeled ``x1`` first, then increasing."""
        order = [1] + sorted(sub.variables - {1})
        return AttentionInputs(relabel(sub, order), [self.q(j) for j in order],
                               [self.v(j) for j in order[1:]], self.d_scale)


@dataclass
class AttentionOutput:
    matrix: np.ndarray
    engine: str
    denominators: np.ndarray | None = field(default=None, repr=False)


# -- components ---------------------------------------------------------------

class ExactEdge:
    """Materialized ``[Q_u Q_v^T / d_scale]^e``."""

    def __init__(self, A, B, d_scale):
        self.E = gram_exp(A, B, d_scale)

    def apply(self, M):
        return matmul(self.E, M)


def tree_numden(sub: AttentionPolynomial, inp: AttentionInputs, root: int, edge_factory=ExactEdge):
    """Bottom-up numerator/denominator over the tree of ``sub`` rooted at ``root``.

    Rows are indexed by ``root``'s query-key rows.  Children are visited in
    increasing index order; sibling subtrees combine by entry-wise product.
    """
    adj = graph_of(sub)
    n, d = inp.n, inp.d

    def visit(v, parent):
        num = np.ones((n, d))
        den = np.ones(n)
        for c in sorted(adj[v]):
            if c == parent:
                continue
            cnum, cden = visit(c, v)
            edge = edge_factory(inp.q(v), inp.q(c), inp.d_scale)
            stacked = np.empty((n, d + 1))
            stacked[:, :d] = inp.v(c) * cnum
            stacked[:, d] = cden
            out = edge.apply(stacked)
            num = num * out[:, :d]
            den = den * out[:, d]
        return num, den

    return visit(root, None)


def cycle_numden(sub: AttentionPolynomial, inp: AttentionInputs, cycle=None):
    """Chain-diagonal evaluation for a polynomial whose graph is one pure cycle.

    With ``X_j`` the exponentiated Gram matrix of cycle edge ``(c_j, c_{j+1})``
    the numerator column is ``diag(X_1 D_2 X_2 D_3 ... D_r X_r)`` and the
    denominator ``diag(X_1 X_2 ... X_r)``.
    """
    if cycle is None:
        cycle = _pure_cycle(graph_of(sub))
    r = len(cycle)
    n, d = inp.n, inp.d
    X = [gram_exp(inp.q(cycle[j]), inp.q(cycle[(j + 1) % r]), inp.d_scale) for j in range(r)]
    be = _backend.active
    P = X[0]
    for j in range(1, r - 1):
        P = be.matmul(P, X[j])
    den = be.diag_pair(P, X[-1])
    num = np.empty((n, d))
    for col in range(d):
        P = X[0] * inp.v(cycle[1])[:, col][None, :]
        for j in range(1, r - 1):
            P = be.matmul(P, X[j]) * inp.v(cycle[j + 1])[:, col][None, :]
        num[:, col] = be.diag_pair(P, X[-1])
    return num, den


def _encode_monomials(sub: AttentionPolynomial, order):
    pos = {v: i for i, v in enumerate(order)}
    mvars, mptr = [], [0]
    for m in sub.monomials:
        mvars.extend(pos[j] for j in m.vars)
        mptr.append(len(mvars))
    return np.asarray(mvars, dtype=np.int64), np.asarray(mptr, dtype=np.int64)


def brute_numden(sub: AttentionPolynomial, inp: AttentionInputs, query: int, variables=None, safe=False):
    """Direct summation over all key tuples of ``variables`` (default: those of ``sub``)."""
    if variables is None:
        variables = sorted(sub.variables | {query})
    order = [query] + [j for j in variables if j != query]
    n = inp.n
    budget = brute_force_budget()
    if n ** (len(order) - 1) > budget:
        raise BudgetError(f"brute force needs n^{len(order) - 1} = {n ** (len(order) - 1)} "
                          f"tuples per row, budget is {budget}")
    mvars, mptr = _encode_monomials(sub, order)
    Qs = np.ascontiguousarray(np.stack([inp.q(j) for j in order]))
    if len(order) > 1:
        Vs = np.ascontiguousarray(np.stack([inp.v(j) for j in order[1:]]))
    else:
        Vs = np.zeros((1, n, inp.d))
    num, den, shift, gmax = _backend.active.bruteforce_numden(Qs, Vs, mvars, mptr, inp.d_scale, bool(safe))
    if not safe and gmax > EXP_LIMIT:
        raise ExponentOverflowError(gmax, where="softmax exponent h/d_scale")
    return num, den, shift


def _collapse(num, den, inp: AttentionInputs, query: int):
    """Sum a component over its own query rows (for components without x1)."""
    ones = np.ones((1, inp.n))
    cnum = matmul(ones, inp.v(query) * num)[0]
    cden = matmul(ones, den[:, None])[0, 0]
    return cnum, cden


def _finish(inp, parts, engine):
    num = np.ones((inp.n, inp.d))
    den = np.ones(inp.n)
    for pnum, pden in parts:
        num = num * pnum
        den = den * pden
    if not np.all(np.isfinite(den)) or not np.all(np.isfinite(num)):
        raise ExponentOverflowError(float("inf"), where="numerator/denominator product")
    if np.any(den == 0.0):
        raise PolyAttnError("all softmax weights underflowed to 0; use the safe brute-force oracle")
    return AttentionOutput(num / den[:, None], engine, den)


def _isolated_parts(inp):
    used = inp.h.variables
    parts = []
    for j in range(2, inp.t + 1):
        if j not in used:
            parts.append((matmul(np.ones((1, inp.n)), inp.v(j))[0], float(inp.n)))
    return parts


def _component_parts(inp, branches, numden):
    parts = []
    for b in branches:
        query = 1 if b.has_x1 else min(b.poly.variables)
        num, den = numden(b.poly, query)
        if b.has_x1:
            parts.append((num, den))
        else:
            parts.append(_collapse(num, den, inp, query))
    return parts + _isolated_parts(inp)


# -- public engines -----------------------------------------------------------

def attend_bruteforce(inp: AttentionInputs, safe: bool = False) -> AttentionOutput:
    """Direct nested summation over all ``(l2, ..., lt)``; the oracle for the other engines.

    ``safe=True`` subtracts each row's maximum exponent before exponentiating.
    """
    num, den, shift = brute_numden(inp.h, inp, 1, variables=list(range(1, inp.t + 1)), safe=safe)
    if not safe and np.any(den == 0.0):
        raise PolyAttnError("all softmax weights underflowed to 0; retry with safe=True")
    return AttentionOutput(num / den[:, None], "brute", None if safe else den)


def attend_tree(inp: AttentionInputs, edge_factory=ExactEdge, engine="tree") -> AttentionOutput:
    if not is_forest(inp.h):
        raise AdmissibilityError(f"tree engine needs a degree-2 acyclic polynomial; "
                                 f"{inp.h} is {build_structure(inp.h).cls}")

    def numden(sub, query):
        return tree_numden(sub, inp, query, edge_factory)

    return _finish(inp, _component_parts(inp, separate_variables(inp.h), numden), engine)


def attend_cycle(inp: AttentionInputs) -> AttentionOutput:
    st = build_structure(inp.h)
    if st.cls != SINGLE_CYCLE:
        raise AdmissibilityError(f"cycle engine needs a single pure cycle; {inp.h} is {st.cls}")

    def numden(sub, query):
        if is_forest(sub):
            return tree_numden(sub, inp, query)
        return cycle_numden(sub, inp)

    return _finish(inp, _component_parts(inp, st.branches, numden), "cycle")


def branch_engine(sub: AttentionPolynomial) -> str:
    if is_forest(sub):
        return "tree"
    adj = graph_of(sub)
    if adj is not None and _pure_cycle(adj) is not None:
        return "cycle"
    return "brute"


def attend_exact(inp: AttentionInputs) -> AttentionOutput:
    """Split into branches sharing only ``x1`` and run the cheapest exact engine on each."""
    used = []

    def numden(sub, query):
        kind = branch_engine(sub)
        used.append(kind)
        if kind == "tree":
            return tree_numden(sub, inp, query)
        if kind == "cycle":
            return cycle_numden(sub, inp)
        num, den, _ = brute_numden(sub, inp, query)
        return num, den

    parts = _component_parts(inp, separate_variables(inp.h), numden)
    tag = "auto:" + "+".join(sorted(set(used)))
    return _finish(inp, parts, tag)


ENGINES = {
    "brute": attend_bruteforce,
    "tree": attend_tree,
    "cycle": attend_cycle,
    "auto": attend_exact,
}


def admissible_exact_engines(h: AttentionPolynomial) -> list[str]:
    cls = build_structure(h).cls
    out = ["auto"]
    if cls == TREE_FOREST:
        out.append("tree")
    elif cls == SINGLE_CYCLE:
        out.append("cycle")
    return out


__all__ = [
    "AttentionInputs", "AttentionOutput", "attend_bruteforce", "attend_tree", "attend_cycle",
    "attend_exact", "admissible_exact_engines", "random_inputs", "ENGINES", "GENERAL",
]


def random_inputs(h: AttentionPolynomial, n: int, d: int, rng, bound: float = 1.0,
                  d_scale: float | None = None) -> AttentionInputs:
    """Query-key then value matrices drawn uniformly from ``[-bound, bound]``."""
    Q = [rng.uniform(-bound, bound, (n, d)) for _ in range(h.t)]
    V = [rng.uniform(-bound, bound, (n, d)) for _ in range(h.t - 1)]
    return AttentionInputs(h, Q, V, d_scale)
