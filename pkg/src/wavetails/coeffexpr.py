"""Parser and evaluator for time-dependent scalar and matrix coefficients.

Expressions are written over the single variable ``t``.  Grammar, from
loosest to tightest binding::

    expr   := term  (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("-" | "+") unary | power
    power  := atom ("^" unary)?          # right associative
    atom   := NUMBER | "t" | NAME "(" expr ")" | "(" expr ")"

``NAME`` is one of ``exp``, ``ln``, ``sin``, ``cos``, ``sqrt``.  Unary plus
is accepted and ignored.  ``^`` binds tighter than unary minus, so ``-2^2``
is ``-4`` and ``2^3^2`` is ``512``.  All arithmetic is 64-bit floating
point; evaluation raises :class:`ExprEvalError` on division by zero,
``ln``/``sqrt`` outside their domain, or a non-finite result.

Parsed trees are immutable and safe to evaluate concurrently.  There is no
symbolic differentiation or simplification, and no complex values: complex
coefficients are entered as separate real/imaginary parts.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from wavetails.errors import WavetailsError

__all__ = [
    "Expr",
    "MatrixExpr",
    "ExprSyntaxError",
    "ExprEvalError",
    "parse_expr",
    "eval_expr",
    "format_expr",
    "parse_matrix",
]

_FUNCTIONS = {
    "exp": math.exp,
    "ln": math.log,
    "sin": math.sin,
    "cos": math.cos,
    "sqrt": math.sqrt,
}


class ExprSyntaxError(WavetailsError):
    """Syntax error while parsing; carries the byte offset of the failure."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class ExprEvalError(WavetailsError):
    """Domain error or non-finite result during evaluation."""


class Expr:
    """Base class for expression nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class TimeVar(Expr):
    pass


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Call(Expr):
    name: str
    arg: Expr


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(src):
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None or m.end() == pos:
            # skip to first non-space to report a useful offset
            off = pos
            while off < len(src) and src[off].isspace():
                off += 1
            raise ExprSyntaxError(f"unexpected character {src[off]!r}", off)
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "name":
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val, off = self.peek()
        if kind != "op" or val != op:
            raise ExprSyntaxError(f"expected {op!r}", off)
        self.advance()

    def parse(self):
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected trailing input {val!r}", off)
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.advance()
                node = BinOp(val, node, self.term())
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.advance()
                node = BinOp(val, node, self.unary())
            else:
                return node

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.advance()
            return Neg(self.unary())
        if kind == "op" and val == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, val, off = self.advance()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val == "t":
                return TimeVar()
            if val in _FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(val, arg)
            raise ExprSyntaxError(f"unknown identifier {val!r}", off)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(f"unexpected token {val!r}" if val else "unexpected end of input", off)


def parse_expr(src):
    """Parse an expression string into an immutable tree."""
    if not src or not src.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(src).parse()


def eval_expr(e, t):
    """Evaluate an expression at time ``t``; returns a finite float."""
    val = _eval(e, float(t))
    if not math.isfinite(val):
        raise ExprEvalError(f"non-finite result {val!r} at t={t}")
    return val


def _eval(e, t):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, TimeVar):
        return t
    if isinstance(e, Neg):
        return -_eval(e.arg, t)
    if isinstance(e, BinOp):
        a = _eval(e.lhs, t)
        b = _eval(e.rhs, t)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            if b == 0.0:
                raise ExprEvalError(f"division by zero at t={t}")
            return a / b
        # e.op == "^"
        try:
            val = a ** b
        except (OverflowError, ZeroDivisionError, ValueError) as exc:
            raise ExprEvalError(f"power error {a}^{b} at t={t}: {exc}") from exc
        if isinstance(val, complex):
            raise ExprEvalError(f"non-real power {a}^{b} at t={t}")
        return val
    if isinstance(e, Call):
        a = _eval(e.arg, t)
        if e.name == "ln" and a <= 0.0:
            raise ExprEvalError(f"ln of non-positive value {a} at t={t}")
        if e.name == "sqrt" and a < 0.0:
            raise ExprEvalError(f"sqrt of negative value {a} at t={t}")
        try:
            return _FUNCTIONS[e.name](a)
        except (OverflowError, ValueError) as exc:
            raise ExprEvalError(f"{e.name}({a}) failed at t={t}: {exc}") from exc
    raise TypeError(f"not an expression node: {e!r}")


# precedence levels used by the formatter; higher binds tighter
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def format_expr(e):
    """Render a tree as a string that re-parses to an equivalent tree."""
    return _format(e, 0)


def _format(e, parent_prec):
    if isinstance(e, Num):
        s = repr(e.value)
        return s
    if isinstance(e, TimeVar):
        return "t"
    if isinstance(e, Neg):
        inner = _format(e.arg, _PREC["neg"])
        s = f"-{inner}"
        return f"({s})" if parent_prec > _PREC["neg"] else s
    if isinstance(e, Call):
        return f"{e.name}({_format(e.arg, 0)})"
    if isinstance(e, BinOp):
        prec = _PREC[e.op]
        if e.op == "^":
            # right associative; left operand must bind tighter
            left = _format(e.lhs, prec + 1)
            right = _format(e.rhs, prec)
        else:
            left = _format(e.lhs, prec)
            # left-associative: right operand needs a higher threshold
            right = _format(e.rhs, prec + 1)
        s = f"{left} {e.op} {right}"
        return f"({s})" if parent_prec > prec else s
    raise TypeError(f"not an expression node: {e!r}")


@dataclass(frozen=True)
class MatrixExpr:
    """A rows-by-cols grid of expressions, evaluated to a real matrix."""

    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("matrix dimensions must be positive")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"expected {self.rows * self.cols} entries, got {len(self.entries)}"
            )

    def __call__(self, t):
        vals = [eval_expr(e, t) for e in self.entries]
        return np.array(vals, dtype=float).reshape(self.rows, self.cols)


def parse_matrix(rows):
    """Parse a list of rows of expression strings into a MatrixExpr."""
    nrows = len(rows)
    if nrows == 0:
        raise ExprSyntaxError("empty matrix", 0)
    ncols = len(rows[0])
    entries = []
    for row in rows:
        if len(row) != ncols:
            raise ExprSyntaxError("ragged matrix rows", 0)
        for src in row:
            entries.append(parse_expr(src))
    return MatrixExpr(nrows, ncols, tuple(entries))
