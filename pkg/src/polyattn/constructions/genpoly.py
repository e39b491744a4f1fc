"""Integer-coefficient polynomials for the root-finding construction.

Grammar (whitespace ignored)::

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := INT | 'x' INT ['^' INT]

A polynomial is a mapping from exponent tuples (length ``t``) to nonzero
integer coefficients.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ParseError

_TOKEN = re.compile(r"\s*(?:(\d+)|(x)(\d+)|(\^)|([+\-*]))")


def _tokenize(text):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos:].strip()[:1]!r} at {pos} in {text!r}")
        if m.group(1):
            out.append(("int", int(m.group(1))))
        elif m.group(2):
            out.append(("var", int(m.group(3))))
        elif m.group(4):
            out.append(("op", "^"))
        else:
            out.append(("op", m.group(5)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens, text):
        self.toks = tokens
        self.i = 0
        self.text = text

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expr(self):
        terms = []
        sign = 1
        kind, val = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
        terms.append(self.term(sign))
        while True:
            kind, val = self.peek()
            if kind is None:
                break
            if kind != "op" or val not in "+-":
                raise ParseError(f"expected '+' or '-' in {self.text!r}")
            self.take()
            terms.append(self.term(-1 if val == "-" else 1))
        return terms

    def term(self, sign):
        powers, coeff_box = {}, [sign]
        self.factor(powers, coeff_box)
        while self.peek() == ("op", "*"):
            self.take()
            self.factor(powers, coeff_box)
        return coeff_box[0], powers

    def factor(self, powers, coeff_box):
        kind, val = self.take()
        if kind == "int":
            coeff_box[0] *= val
        elif kind == "var":
            if val < 1:
                raise ParseError("variable indices start at 1 (found x0)")
            k = 1
            if self.peek() == ("op", "^"):
                self.take()
                kind2, k = self.take()
                if kind2 != "int":
                    raise ParseError(f"exponent after '^' must be an integer in {self.text!r}")
            powers[val] = powers.get(val, 0) + k
        else:
            raise ParseError(f"expected a number or variable in {self.text!r}")


@dataclass(frozen=True)
class GeneralPolynomial:
    t: int
    terms: tuple  # ((exponents, coeff), ...) sorted by exponents, zero coefficients dropped

    @classmethod
    def from_dict(cls, t, coeffs):
        items = tuple(sorted((tuple(e), int(c)) for e, c in coeffs.items() if c != 0))
        return cls(t, items)

    @property
    def degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=0)

    @property
    def sparsity(self) -> int:
        return len(self.terms)

    def as_dict(self):
        return dict(self.terms)

    def square(self) -> "GeneralPolynomial":
        out = {}
        for e1, c1 in self.terms:
            for e2, c2 in self.terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return GeneralPolynomial.from_dict(self.t, out)

    def __call__(self, y):
        y = [float(v) for v in y]
        total = 0.0
        for e, c in self.terms:
            prod = float(c)
            for v, k in zip(y, e):
                prod *= v ** k
            total += prod
        return total

    def eval_exact(self, y) -> int:
        """Exact evaluation for integer arguments (Python ints)."""
        total = 0
        for e, c in self.terms:
            prod = c
            for v, k in zip(y, e):
                prod *= int(v) ** k
            total += prod
        return total

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms, key=lambda ec: (-sum(ec[0]), [-k for k in ec[0]])):
            fac = [f"x{j + 1}" + (f"^{k}" if k > 1 else "") for j, k in enumerate(e) if k]
            mag = abs(c)
            body = "*".join(([str(mag)] if mag != 1 or not fac else []) + fac)
            parts.append(("-" if c < 0 else "+") + body)
        s = "".join(parts)
        return s[1:] if s.startswith("+") else s

    def __str__(self):
        return self.render()


def parse_general(text: str, t: int | None = None) -> GeneralPolynomial:
    """Parse text like ``"x1*x2 - 3*x3^2 + 1"``.

    >>> parse_general("x1+x2+x3").render()
    'x1+x2+x3'
    """
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty polynomial")
    terms = _Parser(tokens, text).expr()
    top = max((max(p) for _, p in terms if p), default=0)
    if t is None:
        t = top
    elif t < top:
        raise ParseError(f"t={t} is smaller than the largest index x{top}")
    coeffs = {}
    for c, powers in terms:
        e = tuple(powers.get(j, 0) for j in range(1, t + 1))
        coeffs[e] = coeffs.get(e, 0) + c
    return GeneralPolynomial.from_dict(t, coeffs)


def pad(p: GeneralPolynomial, t: int) -> GeneralPolynomial:
    if t < p.t:
        raise ParseError(f"cannot shrink a polynomial on {p.t} variables to {t}")
    return GeneralPolynomial.from_dict(t, {e + (0,) * (t - p.t): c for e, c in p.terms})

