"""Attention polynomials: parsing, canonical ordering, evaluation and structure.

An attention polynomial is a multilinear polynomial with {0, 1} coefficients
whose monomials all have degree at least two.  Monomials are stored as sorted
tuples of 1-based variable indices and kept in preference order (higher
degree first, then lexicographic).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cmp_to_key
from typing import Sequence

import numpy as np

from .errors import ParseError

TREE_FOREST = "tree_forest"
SINGLE_CYCLE = "single_cycle"
GENERAL = "general"


def _mono_key(vars_: tuple[int, ...]):
    return (-len(vars_), vars_)


def monomial_order_cmp(m1: Sequence[int], m2: Sequence[int]) -> int:
    """Return -1 if ``m1`` has higher preference than ``m2``, 1 if lower, 0 if equal.

    Higher degree wins; among equal degrees the monomial holding the smallest
    index of the symmetric difference wins.
    """
    a, b = tuple(m1), tuple(m2)
    if len(a) != len(b):
        return -1 if len(a) > len(b) else 1
    diff = set(a) ^ set(b)
    if not diff:
        return 0
    return -1 if min(diff) in a else 1


@dataclass(frozen=True)
class Monomial:
    vars: tuple[int, ...]

    def __post_init__(self):
        v = tuple(int(x) for x in self.vars)
        object.__setattr__(self, "vars", v)
        if len(v) < 2:
            raise ParseError(f"monomial {v} has degree < 2")
        if any(x < 1 for x in v):
            raise ParseError(f"monomial {v} uses an index below 1")
        if any(v[i] >= v[i + 1] for i in range(len(v) - 1)):
            raise ParseError(f"monomial {v} is not strictly increasing")

    @property
    def degree(self) -> int:
        return len(self.vars)

    def __contains__(self, j) -> bool:
        return j in self.vars

    def render(self) -> str:
        return "*".join(f"x{j}" for j in self.vars)


@dataclass(frozen=True)
class AttentionPolynomial:
    t: int
    monomials: tuple[Monomial, ...]

    def __post_init__(self):
        monos = tuple(m if isinstance(m, Monomial) else Monomial(tuple(m)) for m in self.monomials)
        if not monos:
            raise ParseError("an attention polynomial needs at least one monomial")
        if len({m.vars for m in monos}) != len(monos):
            raise ParseError("duplicate monomial")
        top = max(max(m.vars) for m in monos)
        if self.t < top:
            raise ParseError(f"t={self.t} is smaller than the largest index x{top}")
        monos = tuple(sorted(monos, key=lambda m: _mono_key(m.vars)))
        object.__setattr__(self, "monomials", monos)

    @classmethod
    def from_terms(cls, terms, t=None) -> "AttentionPolynomial":
        monos = [Monomial(tuple(sorted(m))) for m in terms]
        if t is None:
            t = max(max(m.vars) for m in monos)
        return cls(t, tuple(monos))

    @property
    def k(self) -> int:
        return max(m.degree for m in self.monomials)

    @property
    def s(self) -> int:
        return len(self.monomials)

    @property
    def terms(self) -> list[tuple[int, ...]]:
        return [m.vars for m in self.monomials]

    @property
    def variables(self) -> set[int]:
        """Indices that occur in at least one monomial."""
        return {j for m in self.monomials for j in m.vars}

    def render(self) -> str:
        return "+".join(m.render() for m in self.monomials)

    def __str__(self) -> str:
        return self.render()


_TERM = re.compile(r"x(\d+)$")


def parse_polynomial(text: str, t: int | None = None) -> AttentionPolynomial:
    """Parse ``"x1*x2+x2*x3"``-style text into a normalized polynomial.

    Whitespace is ignored.  ``t`` overrides the inferred variable count (the
    largest index seen); unused intermediate indices are allowed.
    """
    src = re.sub(r"\s+", "", text)
    if not src:
        raise ParseError("empty polynomial")
    monos = []
    seen = set()
    for term in src.split("+"):
        if not term:
            raise ParseError(f"empty term in {text!r}")
        idx = []
        for factor in term.split("*"):
            m = _TERM.match(factor)
            if not m:
                raise ParseError(f"bad variable {factor!r} in term {term!r}")
            j = int(m.group(1))
            if j == 0:
                raise ParseError("variable indices start at 1 (found x0)")
            idx.append(j)
        if len(idx) < 2:
            raise ParseError(f"term {term!r} has degree 1; attention monomials need degree >= 2")
        if len(set(idx)) != len(idx):
            raise ParseError(f"term {term!r} repeats a variable (not multilinear)")
        key = tuple(sorted(idx))
        if key in seen:
            raise ParseError(f"duplicate term {term!r}")
        seen.add(key)
        monos.append(Monomial(key))
    top = max(max(m.vars) for m in monos)
    if t is None:
        t = top
    elif t < top:
        raise ParseError(f"t={t} is smaller than the largest index x{top}")
    return AttentionPolynomial(t, tuple(monos))


def evaluate(h: AttentionPolynomial, Y) -> float:
    """Sum over monomials of generalized inner products of the chosen vectors."""
    Y = [np.asarray(y, dtype=np.float64) for y in Y]
    if len(Y) != h.t:
        raise ParseError(f"expected {h.t} vectors, got {len(Y)}")
    d = Y[0].shape[0]
    if d < 1 or any(y.ndim != 1 or y.shape[0] != d for y in Y):
        raise ParseError("all vectors must be 1-D with the same length >= 1")
    total = 0.0
    for m in h.monomials:
        prod = np.ones(d)
        for j in m.vars:
            prod = prod * Y[j - 1]
        total += float(prod.sum())
    return total


def relabel(h: AttentionPolynomial, order: Sequence[int]) -> AttentionPolynomial:
    """Rename variable ``order[i]`` to ``x_{i+1}``; every used variable must be listed."""
    pos = {v: i + 1 for i, v in enumerate(order)}
    missing = h.variables - set(pos)
    if missing:
        raise ParseError(f"relabel order misses variables {sorted(missing)}")
    return AttentionPolynomial.from_terms([[pos[j] for j in m.vars] for m in h.monomials], t=len(order))


class UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        # smaller root index wins so component labels are deterministic
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


@dataclass(frozen=True)
class Branch:
    poly: AttentionPolynomial
    has_x1: bool

    @property
    def variables(self) -> list[int]:
        return sorted(self.poly.variables)


@dataclass(frozen=True)
class PolyStructure:
    poly: AttentionPolynomial
    cls: str
    adjacency: dict | None = None
    cycle: tuple[int, ...] = ()
    branches: tuple[Branch, ...] = field(default=())

    @property
    def cycle_length(self) -> int:
        return len(self.cycle)

    @property
    def edges(self) -> list[tuple[int, int]]:
        if self.adjacency is None:
            return []
        return sorted((u, v) for u, nb in self.adjacency.items() for v in nb if u < v)

    def to_dict(self) -> dict:
        return {
            "poly": self.poly.render(),
            "t": self.poly.t,
            "k": self.poly.k,
            "s": self.poly.s,
            "class": self.cls,
            "cycle_length": self.cycle_length if self.cls == SINGLE_CYCLE else None,
            "cycle": list(self.cycle) if self.cls == SINGLE_CYCLE else None,
            "edges": [list(e) for e in self.edges] if self.adjacency is not None else None,
            "branches": [{"poly": b.poly.render(), "has_x1": b.has_x1} for b in self.branches],
        }


def graph_of(h: AttentionPolynomial) -> dict[int, set[int]] | None:
    if h.k != 2:
        return None
    adj = {v: set() for v in range(1, h.t + 1)}
    for a, b in h.terms:
        adj[a].add(b)
        adj[b].add(a)
    return adj


def is_forest(h: AttentionPolynomial) -> bool:
    if h.k != 2:
        return False
    uf = UnionFind(range(1, h.t + 1))
    return all(uf.union(a, b) for a, b in h.terms)


def _pure_cycle(adj: dict[int, set[int]]) -> tuple[int, ...] | None:
    """Return the unique cycle in walk order if the graph has exactly one cycle
    and every cycle vertex has degree 2; otherwise None."""
    n_edges = sum(len(nb) for nb in adj.values()) // 2
    uf = UnionFind(adj)
    for u, nb in adj.items():
        for v in nb:
            if u < v:
                uf.union(u, v)
    n_comp = len({uf.find(v) for v in adj})
    if n_edges - len(adj) + n_comp != 1:
        return None
    deg = {v: len(nb) for v, nb in adj.items()}
    alive = set(adj)
    stack = [v for v in adj if deg[v] <= 1]
    while stack:
        v = stack.pop()
        if v not in alive:
            continue
        alive.discard(v)
        for u in adj[v]:
            if u in alive:
                deg[u] -= 1
                if deg[u] <= 1:
                    stack.append(u)
    if any(len(adj[v]) != 2 for v in alive):
        return None
    start = min(alive)
    order = [start]
    prev, cur = None, min(adj[start])
    while cur != start:
        order.append(cur)
        nxt = [u for u in adj[cur] if u != (prev if prev is not None else start)]
        prev, cur = cur, nxt[0]
    return tuple(order)


def separate_variables(h: AttentionPolynomial) -> list[Branch]:
    """Split ``h`` into branches that pairwise share at most ``x1``.

    Variables other than ``x1`` are grouped by co-occurrence; each group's
    monomials form one branch.  Branches come out ordered by their smallest
    non-``x1`` variable.
    """
    others = sorted(h.variables - {1})
    uf = UnionFind(others)
    for m in h.monomials:
        rest = [j for j in m.vars if j != 1]
        for a, b in zip(rest, rest[1:]):
            uf.union(a, b)
    groups: dict[int, list[tuple[int, ...]]] = {}
    for m in h.monomials:
        rest = [j for j in m.vars if j != 1]
        groups.setdefault(uf.find(rest[0]), []).append(m.vars)
    out = []
    for root in sorted(groups):
        terms = groups[root]
        out.append(Branch(AttentionPolynomial.from_terms(terms, t=h.t),
                          any(1 in m for m in terms)))
    return out


def build_structure(h: AttentionPolynomial) -> PolyStructure:
    branches = tuple(separate_variables(h))
    adj = graph_of(h)
    if adj is None:
        return PolyStructure(h, GENERAL, None, (), branches)
    if is_forest(h):
        return PolyStructure(h, TREE_FOREST, adj, (), branches)
    cycle = _pure_cycle(adj)
    if cycle is not None:
        return PolyStructure(h, SINGLE_CYCLE, adj, cycle, branches)
    return PolyStructure(h, GENERAL, adj, (), branches)


def classify(h: AttentionPolynomial) -> str:
    return build_structure(h).cls


monomial_sort_key = cmp_to_key(monomial_order_cmp)
