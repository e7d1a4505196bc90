"""Expression language for graph coordinate functions, with second-order jets.

A small recursive-descent parser builds an immutable AST for expressions in
the variables x and y; evaluation propagates 6-slot forward-mode numbers
(value and all partial derivatives up to second order), so mixed partials
are symmetric by construction and derivatives are exact to rounding.

Grammar (whitespace-insensitive):

    expr    = term { ("+"|"-") term }
    term    = factor { ("*"|"/") factor }
    factor  = ["-"] base [ "^" factor ]          right-associative power
    base    = number | "x" | "y" | "pi" | "e" | func "(" expr ")" | "(" expr ")"
    func    = sin cos tan exp log sqrt sinh cosh tanh atan
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

from .errors import DomainError, ExpressionSyntaxError, UnknownIdentifier


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # "x" or "y"


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or a function name
    arg: "ExprAst"


@dataclass(frozen=True)
class Binary:
    op: str  # "add" | "sub" | "mul" | "div" | "pow"
    left: "ExprAst"
    right: "ExprAst"


ExprAst = Union[Const, Var, Unary, Binary]

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh", "atan")
CONSTANTS = {"pi": math.pi, "e": math.e}


# ---------------------------------------------------------------------------
# Tokenizer / parser

_NUMBER_RE = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


@dataclass(frozen=True)
class _Token:
    kind: str  # "number" | "ident" | one of "+-*/^()" | "end"
    text: str
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or c == ".":
            m = _NUMBER_RE.match(text, i)
            if m is None:
                raise ExpressionSyntaxError(
                    f"malformed number at offset {i}", i, {"number"}
                )
            tokens.append(_Token("number", m.group(), i))
            i = m.end()
            continue
        if c.isalpha() or c == "_":
            m = _IDENT_RE.match(text, i)
            tokens.append(_Token("ident", m.group(), i))
            i = m.end()
            continue
        if c in "+-*/^()":
            tokens.append(_Token(c, c, i))
            i += 1
            continue
        raise ExpressionSyntaxError(
            f"unexpected character {c!r} at offset {i}", i, {"token"}
        )
    tokens.append(_Token("end", "", len(text)))
    return tokens


_BASE_EXPECTED = frozenset(
    {"number", "x", "y", "pi", "e", "function", "'('", "'-'"}
)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected) -> None:
        tok = self.peek()
        shown = tok.text if tok.kind != "end" else "end of input"
        raise ExpressionSyntaxError(
            f"unexpected {shown!r} at offset {tok.offset}; expected one of "
            + ", ".join(sorted(expected)),
            tok.offset,
            expected,
        )

    def expect(self, kind: str) -> _Token:
        if self.peek().kind != kind:
            self.fail({f"'{kind}'"})
        return self.advance()

    def parse(self) -> ExprAst:
        node = self.expr()
        if self.peek().kind != "end":
            self.fail({"'+'", "'-'", "'*'", "'/'", "end of input"})
        return node

    def expr(self) -> ExprAst:
        node = self.term()
        while self.peek().kind in ("+", "-"):
            op = self.advance().kind
            node = Binary("add" if op == "+" else "sub", node, self.term())
        return node

    def term(self) -> ExprAst:
        node = self.factor()
        while self.peek().kind in ("*", "/"):
            op = self.advance().kind
            node = Binary("mul" if op == "*" else "div", node, self.factor())
        return node

    def factor(self) -> ExprAst:
        negate = False
        if self.peek().kind == "-":
            self.advance()
            negate = True
        node = self.base()
        if self.peek().kind == "^":
            self.advance()
            node = Binary("pow", node, self.factor())
        return Unary("neg", node) if negate else node

    def base(self) -> ExprAst:
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return Const(float(tok.text))
        if tok.kind == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "ident":
            self.advance()
            if tok.text in ("x", "y"):
                return Var(tok.text)
            if tok.text in CONSTANTS:
                return Const(CONSTANTS[tok.text])
            if tok.text in FUNCTIONS:
                self.expect("(")
                node = self.expr()
                self.expect(")")
                return Unary(tok.text, node)
            raise UnknownIdentifier(
                f"unknown identifier {tok.text!r} at offset {tok.offset}",
                tok.offset,
                _BASE_EXPECTED,
            )
        self.fail(_BASE_EXPECTED)


def parse_expression(text: str) -> ExprAst:
    """Parse expression text into an AST; errors carry the byte offset."""
    if not text or text.isspace():
        raise ExpressionSyntaxError("empty expression", 0, _BASE_EXPECTED)
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Pretty-printer (minimal parentheses; parse(format(ast)) == ast)


def _is_atom(node: ExprAst) -> bool:
    return isinstance(node, (Const, Var)) or (
        isinstance(node, Unary) and node.op != "neg"
    )


def _wrap(s: str, need: bool) -> str:
    return f"({s})" if need else s


def format_expression(node: ExprAst) -> str:
    """Render an AST back to grammar-conformant text."""
    if isinstance(node, Const):
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        if node.op == "neg":
            inner = format_expression(node.arg)
            bare = _is_atom(node.arg) or (
                isinstance(node.arg, Binary) and node.arg.op == "pow"
            )
            return "-" + _wrap(inner, not bare)
        return f"{node.op}({format_expression(node.arg)})"
    left, right = format_expression(node.left), format_expression(node.right)
    if node.op in ("add", "sub"):
        sym = "+" if node.op == "add" else "-"
        right_paren = isinstance(node.right, Binary) and node.right.op in ("add", "sub")
        return f"{left} {sym} {_wrap(right, right_paren)}"
    if node.op in ("mul", "div"):
        sym = "*" if node.op == "mul" else "/"
        left_paren = isinstance(node.left, Binary) and node.left.op in ("add", "sub")
        right_paren = isinstance(node.right, Binary) and node.right.op in (
            "add",
            "sub",
            "mul",
            "div",
        )
        return f"{_wrap(left, left_paren)}{sym}{_wrap(right, right_paren)}"
    # pow: left operand must be a bare base, right operand a factor
    left_paren = not _is_atom(node.left)
    right_paren = isinstance(node.right, Binary) and node.right.op in (
        "add",
        "sub",
        "mul",
        "div",
    )
    return f"{_wrap(left, left_paren)}^{_wrap(right, right_paren)}"


# ---------------------------------------------------------------------------
# Second-order forward-mode numbers


@dataclass(frozen=True, slots=True)
class ScalarJet2:
    """Value and partial derivatives through second order at one point."""

    value: float
    dx: float = 0.0
    dy: float = 0.0
    dxx: float = 0.0
    dxy: float = 0.0
    dyy: float = 0.0

    @property
    def is_constant(self) -> bool:
        return self.dx == self.dy == self.dxx == self.dxy == self.dyy == 0.0

    def __add__(self, other):
        o = _coerce(other)
        return ScalarJet2(
            self.value + o.value,
            self.dx + o.dx,
            self.dy + o.dy,
            self.dxx + o.dxx,
            self.dxy + o.dxy,
            self.dyy + o.dyy,
        )

    __radd__ = __add__

    def __neg__(self):
        return ScalarJet2(
            -self.value, -self.dx, -self.dy, -self.dxx, -self.dxy, -self.dyy
        )

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        a, b = self, _coerce(other)
        return ScalarJet2(
            a.value * b.value,
            a.dx * b.value + a.value * b.dx,
            a.dy * b.value + a.value * b.dy,
            a.dxx * b.value + 2.0 * a.dx * b.dx + a.value * b.dxx,
            a.dxy * b.value + a.dx * b.dy + a.dy * b.dx + a.value * b.dxy,
            a.dyy * b.value + 2.0 * a.dy * b.dy + a.value * b.dyy,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        a, b = self, _coerce(other)
        if b.value == 0.0:
            raise DomainError("division by zero")
        v = a.value / b.value
        dx = (a.dx - v * b.dx) / b.value
        dy = (a.dy - v * b.dy) / b.value
        dxx = (a.dxx - 2.0 * dx * b.dx - v * b.dxx) / b.value
        dxy = (a.dxy - dx * b.dy - dy * b.dx - v * b.dxy) / b.value
        dyy = (a.dyy - 2.0 * dy * b.dy - v * b.dyy) / b.value
        return ScalarJet2(v, dx, dy, dxx, dxy, dyy)

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __pow__(self, other):
        return jet_pow(self, other)

    def __rpow__(self, other):
        return jet_pow(_coerce(other), self)


def _coerce(v) -> ScalarJet2:
    if isinstance(v, ScalarJet2):
        return v
    return ScalarJet2(float(v))


def variable_jets(x: float, y: float) -> tuple[ScalarJet2, ScalarJet2]:
    """Seed jets for the two coordinates at the evaluation point."""
    return ScalarJet2(float(x), dx=1.0), ScalarJet2(float(y), dy=1.0)


def _chain(g: ScalarJet2, f0: float, f1: float, f2: float) -> ScalarJet2:
    """Compose a scalar function (value f0, derivatives f1, f2 at g.value) with g."""
    return ScalarJet2(
        f0,
        f1 * g.dx,
        f1 * g.dy,
        f2 * g.dx * g.dx + f1 * g.dxx,
        f2 * g.dx * g.dy + f1 * g.dxy,
        f2 * g.dy * g.dy + f1 * g.dyy,
    )


def jet_sin(g: ScalarJet2) -> ScalarJet2:
    s, c = math.sin(g.value), math.cos(g.value)
    return _chain(g, s, c, -s)


def jet_cos(g: ScalarJet2) -> ScalarJet2:
    s, c = math.sin(g.value), math.cos(g.value)
    return _chain(g, c, -s, -c)


def jet_tan(g: ScalarJet2) -> ScalarJet2:
    t = math.tan(g.value)
    d = 1.0 + t * t
    return _chain(g, t, d, 2.0 * t * d)


def jet_exp(g: ScalarJet2) -> ScalarJet2:
    e = math.exp(g.value)
    return _chain(g, e, e, e)


def jet_log(g: ScalarJet2) -> ScalarJet2:
    if g.value <= 0.0:
        raise DomainError(f"log of non-positive value {g.value!r}")
    inv = 1.0 / g.value
    return _chain(g, math.log(g.value), inv, -inv * inv)


def jet_sqrt(g: ScalarJet2) -> ScalarJet2:
    if g.value <= 0.0:
        raise DomainError(f"sqrt of non-positive value {g.value!r}")
    s = math.sqrt(g.value)
    return _chain(g, s, 0.5 / s, -0.25 / (s * g.value))


def jet_sinh(g: ScalarJet2) -> ScalarJet2:
    s, c = math.sinh(g.value), math.cosh(g.value)
    return _chain(g, s, c, s)


def jet_cosh(g: ScalarJet2) -> ScalarJet2:
    s, c = math.sinh(g.value), math.cosh(g.value)
    return _chain(g, c, s, c)


def jet_tanh(g: ScalarJet2) -> ScalarJet2:
    t = math.tanh(g.value)
    d = 1.0 - t * t
    return _chain(g, t, d, -2.0 * t * d)


def jet_atan(g: ScalarJet2) -> ScalarJet2:
    d = 1.0 / (1.0 + g.value * g.value)
    return _chain(g, math.atan(g.value), d, -2.0 * g.value * d * d)


def jet_pow(base: ScalarJet2, exponent) -> ScalarJet2:
    """Power with exact integer-exponent handling.

    Integer exponents work for any base (except negative powers of zero);
    anything else requires a strictly positive base.
    """
    e = _coerce(exponent)
    if e.is_constant:
        p = e.value
        if float(p).is_integer():
            p = int(p)
            a = base.value
            if a == 0.0 and p < 0:
                raise DomainError("zero raised to a negative power")
            f0 = float(a ** p) if p >= 0 or a != 0.0 else 0.0
            f1 = float(p) * a ** (p - 1) if p != 0 else 0.0
            f2 = float(p * (p - 1)) * a ** (p - 2) if p * (p - 1) != 0 else 0.0
            return _chain(base, f0, f1, f2)
        if base.value <= 0.0:
            raise DomainError(
                f"non-integer power of non-positive base {base.value!r}"
            )
        f0 = base.value ** p
        f1 = p * base.value ** (p - 1.0)
        f2 = p * (p - 1.0) * base.value ** (p - 2.0)
        return _chain(base, f0, f1, f2)
    if base.value <= 0.0:
        raise DomainError(
            f"variable power of non-positive base {base.value!r}"
        )
    return jet_exp(e * jet_log(base))


_UNARY_JET = {
    "sin": jet_sin,
    "cos": jet_cos,
    "tan": jet_tan,
    "exp": jet_exp,
    "log": jet_log,
    "sqrt": jet_sqrt,
    "sinh": jet_sinh,
    "cosh": jet_cosh,
    "tanh": jet_tanh,
    "atan": jet_atan,
}


def _eval(node: ExprAst, xj: ScalarJet2, yj: ScalarJet2) -> ScalarJet2:
    try:
        if isinstance(node, Const):
            return ScalarJet2(node.value)
        if isinstance(node, Var):
            return xj if node.name == "x" else yj
        if isinstance(node, Unary):
            arg = _eval(node.arg, xj, yj)
            if node.op == "neg":
                return -arg
            return _UNARY_JET[node.op](arg)
        left = _eval(node.left, xj, yj)
        if node.op == "pow":
            right = _eval(node.right, xj, yj)
            return jet_pow(left, right)
        right = _eval(node.right, xj, yj)
        if node.op == "add":
            return left + right
        if node.op == "sub":
            return left - right
        if node.op == "mul":
            return left * right
        return left / right
    except DomainError as err:
        if err.node is None:
            raise DomainError(str(err), node=format_expression(node)) from None
        raise


def eval_jet(ast: ExprAst, x: float, y: float) -> ScalarJet2:
    """Evaluate value and all partial derivatives through second order at (x, y)."""
    xj, yj = variable_jets(x, y)
    return _eval(ast, xj, yj)
