"""Space-expression AST and a recursive-descent parser for its text form.

Grammar::

    expr   := "linf(" INT ")" | "l1(" INT ")" | "lp(" INT "," FLOAT ")"
            | "hilbert(" INT "," ("real"|"complex") ")" | "polygon(" INT ")"
            | "hexquot" | "sum_inf(" expr "," expr ")" | "sum_1(" expr "," expr ")"
            | "dual(" expr ")" | "ker(" expr ";" vector {"," vector} ")"
            | "xtrunc(" INT ")" | "x2trunc(" INT ")"
    vector := "[" FLOAT {"," FLOAT} "]"

Whitespace between tokens is ignored.  ``str(expr)`` renders the canonical
text, and ``parse_space_expr(str(e)) == e`` for every valid ``e``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Tuple, Union

from .errors import ParseError, SemanticError


def _fmt(x):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return str(int(x)) if x.is_integer() and abs(x) < 1e15 else repr(x)


@dataclass(frozen=True)
class Linf:
    n: int

    def __str__(self):
        return f"linf({self.n})"


@dataclass(frozen=True)
class L1:
    n: int

    def __str__(self):
        return f"l1({self.n})"


@dataclass(frozen=True)
class Lp:
    n: int
    p: float

    def __str__(self):
        return f"lp({self.n}, {_fmt(self.p)})"


@dataclass(frozen=True)
class Hilbert:
    n: int
    field: str = "real"

    def __str__(self):
        return f"hilbert({self.n}, {self.field})"


@dataclass(frozen=True)
class Polygon:
    n: int

    def __str__(self):
        return f"polygon({self.n})"


@dataclass(frozen=True)
class HexQuot:
    def __str__(self):
        return "hexquot"


@dataclass(frozen=True)
class SumInf:
    left: "SpaceExpr"
    right: "SpaceExpr"

    def __str__(self):
        return f"sum_inf({self.left}, {self.right})"


@dataclass(frozen=True)
class Sum1:
    left: "SpaceExpr"
    right: "SpaceExpr"

    def __str__(self):
        return f"sum_1({self.left}, {self.right})"


@dataclass(frozen=True)
class Dual:
    inner: "SpaceExpr"

    def __str__(self):
        return f"dual({self.inner})"


@dataclass(frozen=True)
class Ker:
    inner: "SpaceExpr"
    functionals: Tuple[Tuple[float, ...], ...]

    def __str__(self):
        vecs = ", ".join("[" + ", ".join(_fmt(c) for c in f) + "]" for f in self.functionals)
        return f"ker({self.inner}; {vecs})"


@dataclass(frozen=True)
class XTrunc:
    n: int

    def __str__(self):
        return f"xtrunc({self.n})"


@dataclass(frozen=True)
class X2Trunc:
    n: int

    def __str__(self):
        return f"x2trunc({self.n})"


SpaceExpr = Union[Linf, L1, Lp, Hilbert, Polygon, HexQuot, SumInf, Sum1, Dual, Ker, XTrunc, X2Trunc]

_INT = re.compile(r"[+-]?\d+")
_FLOAT = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?|[+-]?inf")
_NAME = re.compile(r"[a-z_0-9]+")


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def error(self, message):
        offset = len(self.text[: self.pos].encode("utf-8"))
        raise ParseError(message, offset)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, token):
        self.skip()
        if not self.text.startswith(token, self.pos):
            self.error(f"expected {token!r}")
        self.pos += len(token)

    def match(self, pattern, what):
        self.skip()
        m = pattern.match(self.text, self.pos)
        if not m:
            self.error(f"expected {what}")
        self.pos = m.end()
        return m.group(0)

    def integer(self):
        return int(self.match(_INT, "integer"))

    def number(self):
        return float(self.match(_FLOAT, "number"))

    def vector(self):
        self.expect("[")
        vals = [self.number()]
        while self._peek(","):
            self.expect(",")
            vals.append(self.number())
        self.expect("]")
        return tuple(vals)

    def _peek(self, token):
        self.skip()
        return self.text.startswith(token, self.pos)

    def expr(self):
        start = self.pos
        name = self.match(_NAME, "space constructor")
        if name == "hexquot":
            return HexQuot()
        if name in ("linf", "l1", "polygon", "xtrunc", "x2trunc"):
            self.expect("(")
            n = self.integer()
            self.expect(")")
            return {"linf": Linf, "l1": L1, "polygon": Polygon, "xtrunc": XTrunc, "x2trunc": X2Trunc}[name](n)
        if name == "lp":
            self.expect("(")
            n = self.integer()
            self.expect(",")
            p = self.number()
            self.expect(")")
            return Lp(n, p)
        if name == "hilbert":
            self.expect("(")
            n = self.integer()
            self.expect(",")
            fld = self.match(re.compile(r"real|complex"), "'real' or 'complex'")
            self.expect(")")
            return Hilbert(n, fld)
        if name in ("sum_inf", "sum_1"):
            self.expect("(")
            a = self.expr()
            self.expect(",")
            b = self.expr()
            self.expect(")")
            return (SumInf if name == "sum_inf" else Sum1)(a, b)
        if name == "dual":
            self.expect("(")
            a = self.expr()
            self.expect(")")
            return Dual(a)
        if name == "ker":
            self.expect("(")
            a = self.expr()
            self.expect(";")
            fs = [self.vector()]
            while self._peek(","):
                self.expect(",")
                fs.append(self.vector())
            self.expect(")")
            return Ker(a, tuple(fs))
        self.pos = start
        self.error(f"unknown constructor {name!r}")


def validate_expr(e):
    """Raise :class:`SemanticError` on out-of-range parameters."""
    if isinstance(e, (Linf, L1, Lp, Hilbert)) and e.n < 1:
        raise SemanticError(f"{type(e).__name__.lower()} needs dimension >= 1, got {e.n}")
    if isinstance(e, Lp) and not (e.p >= 1 or math.isinf(e.p)):
        raise SemanticError(f"lp needs p >= 1, got {e.p}")
    if isinstance(e, Hilbert) and e.field not in ("real", "complex"):
        raise SemanticError(f"unknown field {e.field!r}")
    if isinstance(e, Polygon) and e.n < 2:
        raise SemanticError(f"polygon needs n >= 2, got {e.n}")
    if isinstance(e, (XTrunc, X2Trunc)) and e.n < 1:
        raise SemanticError(f"truncation level must be >= 1, got {e.n}")
    if isinstance(e, (SumInf, Sum1)):
        validate_expr(e.left)
        validate_expr(e.right)
    if isinstance(e, Dual):
        validate_expr(e.inner)
    if isinstance(e, Ker):
        validate_expr(e.inner)
        if len({len(f) for f in e.functionals}) != 1:
            raise SemanticError("ker functionals must share one length")
    return e


def parse_space_expr(text):
    """Parse ``text`` into a :data:`SpaceExpr`, validating parameters."""
    p = _Parser(text)
    e = p.expr()
    p.skip()
    if p.pos != len(text):
        p.error("trailing input")
    return validate_expr(e)
