"""Scalar expressions over chart coordinates, with exact order-2 jets.

Grammar (see also README):

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | power
    power  := atom ('^' exponent)*
    exponent := ['-'] INTEGER | '(' exponent ')'
    atom   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

Functions: sin, cos, tan, cot, exp, log, sqrt.  Power binds tighter than
unary minus (``-t^2`` is ``-(t^2)``) and chains left-associatively.
Exponents must be integer literals; fractional powers are written with
sqrt/exp/log.  Angles are raw radians.

Evaluation propagates (value, gradient, hessian) triples forward through
the tree, so first and second derivatives are exact up to rounding; finite
differences exist only as a test oracle.  Trees are immutable after parse
and evaluation is pure, so expressions are safe to share across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import EvalDomainError, ExprSyntaxError, UnknownIdentifierError

FUNCTIONS = ("sin", "cos", "tan", "cot", "exp", "log", "sqrt")


# --- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str
    index: int


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class Add:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Sub:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Mul:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Div:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call]


def _num(value: float) -> Node:
    """Literal node; negatives are canonicalized as Neg(Num) so that
    parse(unparse(tree)) reproduces the tree exactly."""
    value = float(value)
    if value == 0.0:
        return Num(0.0)  # normalizes -0.0
    if value < 0.0:
        return Neg(Num(-value))
    return Num(value)


def _is_const(node: Node, value: float) -> bool:
    return isinstance(node, Num) and node.value == value


def _const_value(node: Node):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Neg) and isinstance(node.arg, Num):
        return -node.arg.value
    return None


# --- tokenizer / parser ----------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            bad = len(text) - len(stripped)
            raise ExprSyntaxError(f"unexpected character '{text[bad]}'", _byte_offset(text, bad))
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "name":
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, coords):
        self.text = text
        self.coords = tuple(coords)
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok):
        raise ExprSyntaxError(message, _byte_offset(self.text, tok[2]))

    def expect_op(self, op):
        tok = self.advance()
        if tok[0] != "op" or tok[1] != op:
            self.error(f"expected '{op}', found '{tok[1] or 'end of input'}'", tok)

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok[0] != "eof":
            self.error(f"trailing input '{tok[1]}'", tok)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.advance()[1]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.advance()[1]
            rhs = self.factor()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def factor(self) -> Node:
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Node:
        node = self.atom()
        while self.peek()[0] == "op" and self.peek()[1] == "^":
            self.advance()
            node = Pow(node, self.exponent())
        return node

    def exponent(self) -> int:
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "(":
            self.advance()
            value = self.exponent()
            self.expect_op(")")
            return value
        sign = 1
        if tok[0] == "op" and tok[1] == "-":
            self.advance()
            sign = -1
            tok = self.peek()
        if tok[0] != "num" or any(c in tok[1] for c in ".eE"):
            self.error("exponent must be an integer literal", tok)
        self.advance()
        return sign * int(tok[1])

    def atom(self) -> Node:
        tok = self.advance()
        if tok[0] == "num":
            return Num(float(tok[1]))
        if tok[0] == "name":
            name = tok[1]
            if name in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(name, arg)
            if name in self.coords:
                return Var(name, self.coords.index(name))
            raise UnknownIdentifierError(name, _byte_offset(self.text, tok[2]))
        if tok[0] == "op" and tok[1] == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        self.error(f"unexpected '{tok[1] or 'end of input'}'", tok)


# --- unparse ---------------------------------------------------------------

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4, Num: 5, Var: 5, Call: 5}


def _unparse(node: Node, parent_prec: int = 0) -> str:
    prec = _PREC[type(node)]
    if isinstance(node, Num):
        text = repr(node.value)
        return text[:-2] if text.endswith(".0") else text
    if isinstance(node, Var):
        text = node.name
    elif isinstance(node, Call):
        text = f"{node.func}({_unparse(node.arg)})"
    elif isinstance(node, Neg):
        text = f"-{_unparse(node.arg, prec)}"
    elif isinstance(node, Pow):
        text = f"{_unparse(node.base, prec + 1)}^{node.exponent}"
    else:
        op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(node)]
        # right side gets a stricter bound so a-(b+c) and a/(b*c) keep parens
        text = f"{_unparse(node.left, prec)}{op}{_unparse(node.right, prec + 1)}"
    if prec < parent_prec:
        return f"({text})"
    return text


# --- jets ------------------------------------------------------------------

class _Jet:
    """Batched (value, gradient, hessian) triple; shapes (B,), (B,n), (B,n,n).

    Hessians stay exactly symmetric: every constructive term is either a
    symmetric input, a scalar multiple of one, or an outer product a (x) b
    added to its transpose (IEEE addition is commutative entrywise).
    """

    __slots__ = ("val", "grad", "hess")

    def __init__(self, val, grad, hess):
        self.val = val
        self.grad = grad
        self.hess = hess

    def __add__(self, other):
        return _Jet(self.val + other.val, self.grad + other.grad, self.hess + other.hess)

    def __sub__(self, other):
        return _Jet(self.val - other.val, self.grad - other.grad, self.hess - other.hess)

    def __neg__(self):
        return _Jet(-self.val, -self.grad, -self.hess)

    def __mul__(self, other):
        val = self.val * other.val
        grad = self.val[:, None] * other.grad + other.val[:, None] * self.grad
        cross = self.grad[:, :, None] * other.grad[:, None, :]
        hess = (
            self.val[:, None, None] * other.hess
            + other.val[:, None, None] * self.hess
            + cross
            + np.swapaxes(cross, 1, 2)
        )
        return _Jet(val, grad, hess)

    def divide(self, other, where):
        if np.any(other.val == 0.0):
            raise EvalDomainError("division by zero", _unparse(where))
        val = self.val / other.val
        grad = (self.grad - val[:, None] * other.grad) / other.val[:, None]
        cross = grad[:, :, None] * other.grad[:, None, :]
        hess = (
            self.hess - val[:, None, None] * other.hess - cross - np.swapaxes(cross, 1, 2)
        ) / other.val[:, None, None]
        return _Jet(val, grad, hess)

    def chain(self, val, d1, d2):
        """Apply a scalar function with value `val` and derivatives d1, d2 at self.val."""
        grad = d1[:, None] * self.grad
        outer = self.grad[:, :, None] * self.grad[:, None, :]
        hess = d1[:, None, None] * self.hess + d2[:, None, None] * outer
        return _Jet(val, grad, hess)


def _jet_pow(jet: _Jet, k: int, where: Node) -> _Jet:
    if k == 0:
        one = np.ones_like(jet.val)
        return _Jet(one, np.zeros_like(jet.grad), np.zeros_like(jet.hess))
    if k < 0 and np.any(jet.val == 0.0):
        raise EvalDomainError("zero raised to a negative power", _unparse(where))
    u = jet.val
    val = u**k
    d1 = k * u ** (k - 1)
    d2 = (k * (k - 1)) * u ** (k - 2) if k != 1 else np.zeros_like(u)
    return jet.chain(val, d1, d2)


def _jet_call(func: str, jet: _Jet, where: Node) -> _Jet:
    u = jet.val
    if func == "sin":
        return jet.chain(np.sin(u), np.cos(u), -np.sin(u))
    if func == "cos":
        return jet.chain(np.cos(u), -np.sin(u), -np.cos(u))
    if func == "tan":
        c = np.cos(u)
        if np.any(c == 0.0):
            raise EvalDomainError("tan at a pole", _unparse(where))
        t = np.tan(u)
        sec2 = 1.0 + t * t
        return jet.chain(t, sec2, 2.0 * t * sec2)
    if func == "cot":
        s = np.sin(u)
        if np.any(s == 0.0):
            raise EvalDomainError("cot at a pole", _unparse(where))
        ct = np.cos(u) / s
        csc2 = 1.0 + ct * ct
        return jet.chain(ct, -csc2, 2.0 * ct * csc2)
    if func == "exp":
        e = np.exp(u)
        return jet.chain(e, e, e)
    if func == "log":
        if np.any(u <= 0.0):
            raise EvalDomainError("log of a nonpositive value", _unparse(where))
        return jet.chain(np.log(u), 1.0 / u, -1.0 / (u * u))
    if func == "sqrt":
        if np.any(u <= 0.0):
            raise EvalDomainError("sqrt of a nonpositive value", _unparse(where))
        r = np.sqrt(u)
        return jet.chain(r, 0.5 / r, -0.25 / (u * r))
    raise AssertionError(f"unhandled function {func}")


def _eval_jet(node: Node, pts: np.ndarray, cache: dict | None = None) -> _Jet:
    # Composed expressions (metric flips, conformal rescaling) share subtree
    # objects; caching per object identity makes those shared scalars
    # evaluate once per batch instead of once per occurrence.
    if cache is not None:
        hit = cache.get(id(node))
        if hit is not None:
            return hit[1]
    jet = _eval_jet_uncached(node, pts, cache)
    if cache is not None:
        cache[id(node)] = (node, jet)  # keep the node alive while its id is a key
    return jet


def _eval_jet_uncached(node: Node, pts: np.ndarray, cache: dict | None) -> _Jet:
    batch, n = pts.shape
    if isinstance(node, Num):
        return _Jet(
            np.full(batch, node.value), np.zeros((batch, n)), np.zeros((batch, n, n))
        )
    if isinstance(node, Var):
        grad = np.zeros((batch, n))
        grad[:, node.index] = 1.0
        return _Jet(pts[:, node.index].copy(), grad, np.zeros((batch, n, n)))
    if isinstance(node, Neg):
        return -_eval_jet(node.arg, pts, cache)
    if isinstance(node, Add):
        return _eval_jet(node.left, pts, cache) + _eval_jet(node.right, pts, cache)
    if isinstance(node, Sub):
        return _eval_jet(node.left, pts, cache) - _eval_jet(node.right, pts, cache)
    if isinstance(node, Mul):
        return _eval_jet(node.left, pts, cache) * _eval_jet(node.right, pts, cache)
    if isinstance(node, Div):
        return _eval_jet(node.left, pts, cache).divide(_eval_jet(node.right, pts, cache), node)
    if isinstance(node, Pow):
        return _jet_pow(_eval_jet(node.base, pts, cache), node.exponent, node)
    if isinstance(node, Call):
        return _jet_call(node.func, _eval_jet(node.arg, pts, cache), node)
    raise AssertionError(f"unhandled node {node!r}")


def _eval_value(node: Node, pts: np.ndarray, cache: dict | None = None) -> np.ndarray:
    if cache is not None:
        hit = cache.get(id(node))
        if hit is not None:
            return hit[1]
    value = _eval_value_uncached(node, pts, cache)
    if cache is not None:
        cache[id(node)] = (node, value)
    return value


def _eval_value_uncached(node: Node, pts: np.ndarray, cache: dict | None) -> np.ndarray:
    if isinstance(node, Num):
        return np.full(pts.shape[0], node.value)
    if isinstance(node, Var):
        return pts[:, node.index].copy()
    if isinstance(node, Neg):
        return -_eval_value(node.arg, pts, cache)
    if isinstance(node, Add):
        return _eval_value(node.left, pts, cache) + _eval_value(node.right, pts, cache)
    if isinstance(node, Sub):
        return _eval_value(node.left, pts, cache) - _eval_value(node.right, pts, cache)
    if isinstance(node, Mul):
        return _eval_value(node.left, pts, cache) * _eval_value(node.right, pts, cache)
    if isinstance(node, Div):
        den = _eval_value(node.right, pts, cache)
        if np.any(den == 0.0):
            raise EvalDomainError("division by zero", _unparse(node))
        return _eval_value(node.left, pts, cache) / den
    if isinstance(node, Pow):
        base = _eval_value(node.base, pts, cache)
        if node.exponent < 0 and np.any(base == 0.0):
            raise EvalDomainError("zero raised to a negative power", _unparse(node))
        return base**node.exponent
    if isinstance(node, Call):
        u = _eval_value(node.arg, pts, cache)
        if node.func == "sin":
            return np.sin(u)
        if node.func == "cos":
            return np.cos(u)
        if node.func == "tan":
            if np.any(np.cos(u) == 0.0):
                raise EvalDomainError("tan at a pole", _unparse(node))
            return np.tan(u)
        if node.func == "cot":
            s = np.sin(u)
            if np.any(s == 0.0):
                raise EvalDomainError("cot at a pole", _unparse(node))
            return np.cos(u) / s
        if node.func == "exp":
            return np.exp(u)
        if node.func == "log":
            if np.any(u <= 0.0):
                raise EvalDomainError("log of a nonpositive value", _unparse(node))
            return np.log(u)
        if node.func == "sqrt":
            if np.any(u < 0.0):
                raise EvalDomainError("sqrt of a negative value", _unparse(node))
            return np.sqrt(u)
    raise AssertionError(f"unhandled node {node!r}")


# --- public types ----------------------------------------------------------

@dataclass(frozen=True)
class JetValue:
    """Value, gradient, and symmetric hessian of a scalar at one point."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray


@dataclass(frozen=True)
class Expression:
    """Immutable scalar expression of the chart coordinates.

    Supports arithmetic operators for programmatic composition (used to
    build flipped and conformally rescaled metric components); operands
    must share the same coordinate tuple.
    """

    root: Node
    coords: tuple[str, ...]

    # -- composition --------------------------------------------------------

    @staticmethod
    def constant(value: float, coords) -> "Expression":
        return Expression(_num(value), tuple(coords))

    @staticmethod
    def coordinate(index: int, coords) -> "Expression":
        coords = tuple(coords)
        return Expression(Var(coords[index], index), coords)

    def _coerce(self, other) -> Node:
        if isinstance(other, Expression):
            if other.coords != self.coords:
                raise ValueError("cannot combine expressions over different charts")
            return other.root
        return _num(other)

    def __add__(self, other):
        rhs = self._coerce(other)
        if _is_const(rhs, 0.0):
            return self
        if _is_const(self.root, 0.0):
            return Expression(rhs, self.coords)
        folded = _const_value(self.root)
        folded_r = _const_value(rhs)
        if folded is not None and folded_r is not None:
            return Expression(_num(folded + folded_r), self.coords)
        return Expression(Add(self.root, rhs), self.coords)

    __radd__ = __add__

    def __sub__(self, other):
        rhs = self._coerce(other)
        if _is_const(rhs, 0.0):
            return self
        folded = _const_value(self.root)
        folded_r = _const_value(rhs)
        if folded is not None and folded_r is not None:
            return Expression(_num(folded - folded_r), self.coords)
        if _is_const(self.root, 0.0):
            return Expression(Neg(rhs), self.coords)
        return Expression(Sub(self.root, rhs), self.coords)

    def __rsub__(self, other):
        return Expression(self._coerce(other), self.coords) - self

    def __mul__(self, other):
        rhs = self._coerce(other)
        if _is_const(self.root, 0.0) or _is_const(rhs, 0.0):
            return Expression(Num(0.0), self.coords)
        if _is_const(rhs, 1.0):
            return self
        if _is_const(self.root, 1.0):
            return Expression(rhs, self.coords)
        folded = _const_value(self.root)
        folded_r = _const_value(rhs)
        if folded is not None and folded_r is not None:
            return Expression(_num(folded * folded_r), self.coords)
        return Expression(Mul(self.root, rhs), self.coords)

    __rmul__ = __mul__

    def __truediv__(self, other):
        rhs = self._coerce(other)
        if _is_const(rhs, 1.0):
            return self
        if _is_const(self.root, 0.0):
            return self
        folded_r = _const_value(rhs)
        if folded_r == 0.0:
            raise ZeroDivisionError("division by constant zero expression")
        folded = _const_value(self.root)
        if folded is not None and folded_r is not None:
            return Expression(_num(folded / folded_r), self.coords)
        return Expression(Div(self.root, rhs), self.coords)

    def __rtruediv__(self, other):
        return Expression(self._coerce(other), self.coords) / self

    def __neg__(self):
        if isinstance(self.root, Neg):
            return Expression(self.root.arg, self.coords)
        if _is_const(self.root, 0.0):
            return self
        return Expression(Neg(self.root), self.coords)

    def pow_int(self, exponent: int) -> "Expression":
        return Expression(Pow(self.root, int(exponent)), self.coords)

    # -- queries -------------------------------------------------------------

    def is_zero(self) -> bool:
        return _is_const(self.root, 0.0)

    def unparse(self) -> str:
        return _unparse(self.root)


def parse_expression(text: str, coords) -> Expression:
    """Parse ``text`` into an Expression over the named chart coordinates."""
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    coords = tuple(coords)
    for name in coords:
        if name in FUNCTIONS or not _NAME_RE.match(name):
            raise ValueError(f"invalid coordinate name '{name}'")
    return Expression(_Parser(text, coords).parse(), coords)


def eval_jet(e: Expression, point) -> JetValue:
    """Exact value/gradient/hessian of ``e`` at a single point."""
    pts = np.asarray(point, dtype=float).reshape(1, len(e.coords))
    jet = _eval_jet(e.root, pts)
    return JetValue(float(jet.val[0]), jet.grad[0], jet.hess[0])


def eval_jet_batch(
    e: Expression, pts, cache: dict | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched jets; ``pts`` has shape (B, n).  Returns (B,), (B,n), (B,n,n).

    Passing one ``cache`` dict across several calls at the same points lets
    expressions that share subtree objects evaluate those only once.
    """
    pts = np.asarray(pts, dtype=float)
    jet = _eval_jet(e.root, pts, cache)
    return jet.val, jet.grad, jet.hess


def eval_values(e: Expression, pts, cache: dict | None = None) -> np.ndarray:
    """Values only (no derivatives); the cheap path for finite-difference oracles."""
    return _eval_value(e.root, np.asarray(pts, dtype=float), cache)
