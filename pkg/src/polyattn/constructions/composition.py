"""r-fold function composition with one tree poly-attention head.

Token ``l`` carries ``phi(l)``: tokens ``(j-1)n+1 .. jn`` list ``f_j(1..n)``
and the last token (``N = rn+1``) holds the start value ``x``.  The chain
polynomial ``x1x2 + ... + x_r x_{r+1}`` scores a tuple by
``-A^2 ln n * sum_j (l_{j+1} - (j-1)n - phi(l_j))^2``, which is zero exactly
along the pointer chain starting at ``l_1``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ..errors import AdmissibilityError, ShapeError
from ..exact_engines import AttentionInputs, attend_tree
from ..poly_core import AttentionPolynomial, Monomial


def build_chain_polynomial(r: int) -> AttentionPolynomial:
    """Path polynomial ``x1*x2 + x2*x3 + ... + x_r*x_{r+1}``.

    >>> build_chain_polynomial(2).render()
    'x1*x2+x2*x3'
    """
    if r < 2:
        raise ShapeError(f"chain polynomial needs r >= 2, got {r}")
    return AttentionPolynomial(r + 1, tuple(Monomial((j, j + 1)) for j in range(1, r + 1)))


@dataclass
class CompositionInstance:
    r: int
    n: int
    f: list
    x: int

    def __post_init__(self):
        if self.r < 2 or self.n < 2:
            raise ShapeError(f"need r >= 2 and n >= 2, got r={self.r}, n={self.n}")
        self.f = [[int(v) for v in fj] for fj in self.f]
        if len(self.f) != self.r:
            raise ShapeError(f"expected {self.r} functions, got {len(self.f)}")
        for fj in self.f:
            if len(fj) != self.n or min(fj) < 1 or max(fj) > self.n:
                raise ShapeError(f"each function must list n={self.n} values in [1, n]")
        self.x = int(self.x)
        if not 1 <= self.x <= self.n:
            raise ShapeError(f"x must lie in [1, {self.n}]")

    @property
    def N(self) -> int:
        return self.r * self.n + 1

    def answer(self) -> int:
        """Direct evaluation of ``f_r(... f_1(x))``."""
        y = self.x
        for fj in self.f:
            y = fj[y - 1]
        return y

    def tokens(self) -> np.ndarray:
        return np.array([v for fj in self.f for v in fj] + [self.x], dtype=np.float64)

    def to_json(self) -> str:
        return json.dumps({"r": self.r, "n": self.n, "f": self.f, "x": self.x})

    @classmethod
    def from_json(cls, text) -> "CompositionInstance":
        obj = json.loads(text) if isinstance(text, str) else text
        try:
            return cls(int(obj["r"]), int(obj["n"]), obj["f"], int(obj["x"]))
        except (KeyError, TypeError) as exc:
            raise ShapeError(f"bad composition instance: {exc}") from exc


def random_composition(r: int, n: int, rng) -> CompositionInstance:
    f = [[int(v) for v in rng.integers(1, n + 1, size=n)] for _ in range(r)]
    return CompositionInstance(r, n, f, int(rng.integers(1, n + 1, size=1)[0]))


def default_scale(r: int) -> float:
    return math.sqrt(r + 3)


@dataclass
class CompositionEncoding:
    inst: CompositionInstance
    h_chain: AttentionPolynomial
    Q: list
    V: list
    A: float
    d_scale: float = 1.0

    def inputs(self) -> AttentionInputs:
        return AttentionInputs(self.h_chain, self.Q, self.V, self.d_scale)


def encode_composition(inst: CompositionInstance, A: float | None = None) -> CompositionEncoding:
    """Query-key and value matrices for ``inst``; ``A`` must exceed ``sqrt(r + 2)``."""
    r, n, N = inst.r, inst.n, inst.N
    if A is None:
        A = default_scale(r)
    if not A > math.sqrt(r + 2):
        raise AdmissibilityError(f"scale A={A:g} must exceed sqrt(r+2) = {math.sqrt(r + 2):.4f}")
    c = A * math.sqrt(math.log(n))
    phi = inst.tokens()
    ell = np.arange(1, N + 1, dtype=np.float64)
    width = 3 * (r + 1)
    own = np.stack([phi ** 2, phi, np.ones(N)], axis=1) * c
    Q = []
    for j in range(1, r + 2):
        M = np.zeros((N, width))
        if j >= 2:
            m = ell - (j - 2) * n
            b = 3 * (j - 2)
            M[:, b:b + 3] = np.stack([-np.ones(N), 2 * m, -(m ** 2)], axis=1) * c
        b = 3 * (j - 1)
        M[:, b:b + 3] = own
        Q.append(M)
    V = []
    for j in range(2, r + 2):
        M = np.zeros((N, width))
        M[:, 0] = phi if j == r + 1 else 1.0
        V.append(M)
    return CompositionEncoding(inst, build_chain_polynomial(r), Q, V, float(A), 1.0)


def chain_mismatch(inst: CompositionInstance, idx) -> float:
    """``sum_j (l_{j+1} - (j-1)n - phi(l_j))^2`` for 1-based token indices."""
    phi = inst.tokens()
    total = 0.0
    for j in range(inst.r):
        total += (idx[j + 1] - j * inst.n - phi[idx[j] - 1]) ** 2
    return total


@dataclass
class CompositionResult:
    value: int | None
    raw: float
    ok: bool


def solve_composition(enc: CompositionEncoding) -> CompositionResult:
    """Run the tree engine and decode the last token's first output column."""
    out = attend_tree(enc.inputs()).matrix
    raw = float(out[enc.inst.N - 1, 0])
    value = int(round(raw))
    ok = 1 <= value <= enc.inst.n and abs(raw - value) < 0.5
    return CompositionResult(value if ok else None, raw, ok)
