"""Polynomial root-finding over a finite set with two poly-attention heads.

Head 1 uses ``h = x1*x2*...*xt`` with one embedding column per monomial of
``p^2`` so that ``h`` evaluates to ``-c_gap * p(y)^2``; its values put
``y_{l_j}`` into column ``j`` for ``j >= 2``.  Head 2 is the same
construction for ``x1 - x2`` and copies ``y_{l_1}`` into column 1.  The sum of
the heads at row ``l_1`` is (close to) the minimizing tuple, which is snapped
to ``S`` and checked by direct evaluation.

With ``tiebreak`` on, extra columns add ``-delta * sum_{j>=2} (l_j - 1) n^(t-j)``
to the exponent and ``c_gap`` is raised above ``delta * (n^(t-1) + 1)``.  Among
several roots in one row this selects the lexicographically first index tuple
by a margin of ``delta``, so the softmax does not average distinct roots.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeError
from ..exact_engines import AttentionInputs, attend_bruteforce
from ..poly_core import AttentionPolynomial, Monomial
from .genpoly import GeneralPolynomial, pad, parse_general

DEFAULT_TOL = 1e-6
MATCH3 = "x1+x2+x3"


def derive_h_for_p(p: GeneralPolynomial):
    """Single-monomial ``h = x1*...*xt`` and, for each monomial of ``p^2``, the ``h`` monomial holding it."""
    if p.t < 2:
        raise ShapeError(f"attention polynomials need t >= 2, got t={p.t}; pad p first")
    h = AttentionPolynomial(p.t, (Monomial(tuple(range(1, p.t + 1))),))
    assignment = {e: 0 for e, _ in p.square().terms}
    return h, assignment


def default_c_gap(t: int, n: int, tol: float = DEFAULT_TOL) -> float:
    return (t + 1) * math.log(n) + math.log(1.0 / tol)


def tiebreak_delta(t: int, S) -> float:
    n = len(S)
    ymax = max(abs(float(v)) for v in S)
    return (t - 1) * math.log(n) + math.log(4 * ymax + 1) + math.log(1.0 / DEFAULT_TOL)


def power_rows(S, k0: int, width: int) -> np.ndarray:
    """Rows ``(1, y, y^2, ..., y^(2 k0), 0, ...)``."""
    y = np.asarray(S, dtype=np.float64)
    X = np.zeros((len(y), width))
    for e in range(2 * k0 + 1):
        X[:, e] = y ** e
    return X


@dataclass
class Head:
    Q: list
    V: list


def _head_matrices(q: GeneralPolynomial, S, c_gap, value_cols, delta, width, k0):
    """Query-key matrices with ``h(rows) = -c_gap * q^2 + tie-break`` and the given value columns."""
    t, n = q.t, len(S)
    X = power_rows(S, k0, width)
    Q = [np.zeros((n, width)) for _ in range(t)]
    for j in range(1, t):
        Q[j][:] = 1.0
    col = 0
    for e, coeff in q.square().terms:
        support = [v for v in range(t) if e[v]]
        lead = support[0] if support else 0
        Q[0][:, col] = 1.0
        for v in range(t):
            if e[v]:
                Q[v][:, col] = X[:, e[v]]
        Q[lead][:, col] = -coeff * c_gap * (X[:, e[lead]] if support else 1.0)
        col += 1
    if delta:
        ell = np.arange(n, dtype=np.float64)
        for j in range(2, t + 1):
            Q[0][:, col] = 1.0
            Q[j - 1][:, col] = -delta * ell * float(n) ** (t - j)
            col += 1
    V = []
    for j in range(2, t + 1):
        M = np.zeros((n, width))
        for c, vals in value_cols(j):
            M[:, c] = vals
        V.append(M)
    return Head(Q, V)


@dataclass
class RootFindingInstance:
    p: GeneralPolynomial
    S: list
    h: AttentionPolynomial
    heads: list
    embed_dim: int
    c_gap: float
    tiebreak: bool
    assignment: dict = field(repr=False, default_factory=dict)

    @property
    def t(self) -> int:
        return self.p.t

    @property
    def n(self) -> int:
        return len(self.S)

    def inputs(self, head: int) -> AttentionInputs:
        H = self.heads[head]
        return AttentionInputs(self.h, H.Q, H.V, 1.0)

    def to_json(self) -> str:
        return json.dumps({"p": self.p.render(), "S": list(self.S)})


def parse_set(text: str) -> list:
    vals = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            v = float(tok)
        except ValueError as exc:
            raise ShapeError(f"bad set element {tok!r}") from exc
        vals.append(int(v) if v.is_integer() else v)
    return vals


def encode_root_finding(p, S, c_gap: float | None = None, tiebreak: bool = True) -> RootFindingInstance:
    """Build both heads for ``p`` over ``S``.

    ``p`` is padded to at least two variables.  ``c_gap`` defaults to
    ``(t+1) ln n + ln(1e6)``; with ``tiebreak`` it is raised as needed.
    """
    if isinstance(p, str):
        p = parse_general(p)
    if p.t < 2:
        p = pad(p, 2)
    S = list(S)
    if not S:
        raise ShapeError("S must be non-empty")
    if len(set(float(v) for v in S)) != len(S):
        raise ShapeError("elements of S must be distinct")
    t, n = p.t, len(S)
    h, assignment = derive_h_for_p(p)
    k0 = max(p.degree, 1)
    if c_gap is None:
        c_gap = default_c_gap(t, n)
    if not c_gap > 0:
        raise ShapeError("c_gap must be positive")
    delta = 0.0
    if tiebreak:
        delta = tiebreak_delta(t, S)
        c_gap = max(float(c_gap), delta * (float(n) ** (t - 1) + 1))
    diff = parse_general("x1-x2", t)
    extra = (t - 1) if tiebreak else 0
    width = max(p.square().sparsity, diff.square().sparsity) + extra
    width = max(width, 2 * k0 + 2, t)
    y = np.asarray(S, dtype=np.float64)

    def values1(j):
        # column c collects y_{l_{c+1}}; every other factor is 1 there
        return [(c, y if c == j - 1 else np.ones(n)) for c in range(1, t)]

    def values2(j):
        return [(0, y if j == 2 else np.ones(n))]

    heads = [
        _head_matrices(p, S, c_gap, values1, delta, width, k0),
        _head_matrices(diff, S, c_gap, values2, delta, width, k0),
    ]
    return RootFindingInstance(p, S, h, heads, width, float(c_gap), tiebreak, assignment)


def _snap(S, v):
    y = np.asarray(S, dtype=np.float64)
    order = np.argsort(np.abs(y - v), kind="stable")
    return order[:2]


def solve_root_finding(inst: RootFindingInstance):
    """Return the first verified root scanning rows ascending, or None."""
    out = sum(attend_bruteforce(inst.inputs(k), safe=True).matrix for k in range(2))
    t = inst.t
    for row in out:
        cands = [_snap(inst.S, row[c]) for c in range(t)]
        first = tuple(inst.S[int(c[0])] for c in cands)
        if _is_root(inst.p, first):
            return first
        for pick in itertools.product(*[c[:2] for c in cands]):
            tup = tuple(inst.S[int(i)] for i in pick)
            if _is_root(inst.p, tup):
                return tup
    return None


def _is_int(tup) -> bool:
    return all(float(v).is_integer() for v in tup)


def _is_root(p: GeneralPolynomial, tup) -> bool:
    return p.eval_exact(tup) == 0 if _is_int(tup) else p(tup) == 0


def brute_force_roots(p: GeneralPolynomial, S):
    """All tuples of ``S^t`` that zero ``p``, in index-lexicographic order."""
    return [tup for tup in itertools.product(S, repeat=p.t) if _is_root(p, tup)]
