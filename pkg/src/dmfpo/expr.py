"""Angle expressions over ``gamma``, ``tau`` and optional GA genes.

Expressions are small immutable trees.  They evaluate with numpy
broadcasting, so one tree can be evaluated over a whole (gamma, tau) grid
or a whole GA population in a single call, and they print to (and parse
from) the closed arithmetic syntax used by sequence files::

    (0.8423 + -0.3455*cos(1.117*gamma) + 0.01806*sin(1.117*gamma))*tau
"""

import ast
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import EvalError, ParseError

_FUNCS = {"cos": np.cos, "sin": np.sin, "exp": np.exp}
_VARS = ("gamma", "tau")


class Expr:
    """Base node.  Supports ``+``, ``-``, ``*`` and ``/`` with numbers."""

    prec = 4  # printing precedence; atoms bind tightest

    def evaluate(self, gamma, tau, genes=None):
        raise NotImplementedError

    def to_text(self):
        raise NotImplementedError

    def genes(self):
        """Indices of gene slots referenced by this expression."""
        return frozenset()

    def __add__(self, other):
        return _binary("+", self, as_expr(other))

    def __radd__(self, other):
        return _binary("+", as_expr(other), self)

    def __sub__(self, other):
        return _binary("-", self, as_expr(other))

    def __rsub__(self, other):
        return _binary("-", as_expr(other), self)

    def __mul__(self, other):
        return _binary("*", self, as_expr(other))

    def __rmul__(self, other):
        return _binary("*", as_expr(other), self)

    def __truediv__(self, other):
        return _binary("/", self, as_expr(other))

    def __neg__(self):
        return Const(-self.value) if isinstance(self, Const) else Neg(self)

    def __str__(self):
        return self.to_text()


def as_expr(x):
    if isinstance(x, Expr):
        return x
    return Const(float(x))


def _binary(op, a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        x, y = a.value, b.value
        if op == "+":
            return Const(x + y)
        if op == "-":
            return Const(x - y)
        if op == "*":
            return Const(x * y)
        return Const(x / y)
    if op == "+":
        return Add((a, b))
    if op == "-":
        return Add((a, Neg(b)))
    if op == "*":
        return Mul(a, b)
    return Div(a, b)


def _wrap(node, min_prec):
    text = node.to_text()
    p = node.prec
    if isinstance(node, Const) and (text.startswith("-") or "/" in text or "*" in text):
        p = 2 if text.startswith("-") else 3
    return text if p >= min_prec else f"({text})"


def _const_text(v):
    if abs(v) == math.pi:
        return "pi" if v > 0 else "-pi"
    for den in (2, 4):
        k = round(v * den / math.pi)
        if k and abs(k) < 64 and k * math.pi / den == v:
            return {1: f"pi/{den}", -1: f"-pi/{den}"}.get(k, f"{k}*pi/{den}")
    return repr(float(v))


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: float

    def evaluate(self, gamma, tau, genes=None):
        return self.value

    def to_text(self):
        return _const_text(self.value)


@dataclass(frozen=True, eq=True)
class Var(Expr):
    name: str

    def __post_init__(self):
        if self.name not in _VARS:
            raise ValueError(f"unknown variable {self.name!r}")

    def evaluate(self, gamma, tau, genes=None):
        return gamma if self.name == "gamma" else tau

    def to_text(self):
        return self.name


@dataclass(frozen=True, eq=True)
class Gene(Expr):
    index: int

    def evaluate(self, gamma, tau, genes=None):
        if genes is None:
            raise EvalError(f"gene {self.index} referenced but no genes supplied")
        return np.asarray(genes)[..., self.index]

    def to_text(self):
        return f"gene{self.index}"

    def genes(self):
        return frozenset({self.index})


@dataclass(frozen=True, eq=True)
class Add(Expr):
    terms: tuple

    def evaluate(self, gamma, tau, genes=None):
        out = self.terms[0].evaluate(gamma, tau, genes)
        for t in self.terms[1:]:
            out = out + t.evaluate(gamma, tau, genes)
        return out

    prec = 1

    def to_text(self):
        return " + ".join([_wrap(self.terms[0], 1)] + [_wrap(t, 2) for t in self.terms[1:]])

    def genes(self):
        return frozenset().union(*(t.genes() for t in self.terms))


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    arg: Expr

    def evaluate(self, gamma, tau, genes=None):
        return -self.arg.evaluate(gamma, tau, genes)

    prec = 2

    def to_text(self):
        return "-" + _wrap(self.arg, 4)

    def genes(self):
        return self.arg.genes()


@dataclass(frozen=True, eq=True)
class Mul(Expr):
    left: Expr
    right: Expr

    def evaluate(self, gamma, tau, genes=None):
        return self.left.evaluate(gamma, tau, genes) * self.right.evaluate(gamma, tau, genes)

    prec = 3

    def to_text(self):
        return f"{_wrap(self.left, 2)}*{_wrap(self.right, 4)}"

    def genes(self):
        return self.left.genes() | self.right.genes()


@dataclass(frozen=True, eq=True)
class Div(Expr):
    left: Expr
    right: Expr

    def evaluate(self, gamma, tau, genes=None):
        return self.left.evaluate(gamma, tau, genes) / self.right.evaluate(gamma, tau, genes)

    prec = 3

    def to_text(self):
        return f"{_wrap(self.left, 2)}/{_wrap(self.right, 4)}"

    def genes(self):
        return self.left.genes() | self.right.genes()


@dataclass(frozen=True, eq=True)
class Func(Expr):
    name: str
    arg: Expr

    def __post_init__(self):
        if self.name not in _FUNCS:
            raise ValueError(f"unknown function {self.name!r}")

    def evaluate(self, gamma, tau, genes=None):
        return _FUNCS[self.name](self.arg.evaluate(gamma, tau, genes))

    def to_text(self):
        return f"{self.name}({self.arg.to_text()})"

    def genes(self):
        return self.arg.genes()


GAMMA = Var("gamma")
TAU = Var("tau")
PI = Const(math.pi)


def cos(x):
    return Func("cos", as_expr(x))


def sin(x):
    return Func("sin", as_expr(x))


def exp(x):
    return Func("exp", as_expr(x))


# Named surface forms.  Coefficients may be numbers or Gene nodes.

def trig_gamma(a, b, c, d):
    """``a + b cos(c gamma) + d sin(c gamma)``."""
    c = as_expr(c)
    return Add((as_expr(a), as_expr(b) * cos(c * GAMMA), as_expr(d) * sin(c * GAMMA)))


def exp2(a, b, c, d):
    """``a exp(b gamma) + c exp(d gamma)``."""
    return Add((as_expr(a) * exp(as_expr(b) * GAMMA), as_expr(c) * exp(as_expr(d) * GAMMA)))


def cubic(c3, c2, c1, c0):
    g = GAMMA
    return Add((as_expr(c3) * g * g * g, as_expr(c2) * g * g, as_expr(c1) * g, as_expr(c0)))


def linear_tau(f):
    """``f(gamma) * tau``."""
    return Mul(as_expr(f), TAU)


def evaluate(expr, gamma, tau, genes=None):
    """Evaluate and check finiteness; raises EvalError otherwise."""
    gamma = np.asarray(gamma, dtype=float)
    tau = np.asarray(tau, dtype=float)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        v = np.asarray(as_expr(expr).evaluate(gamma, tau, genes), dtype=float)
    if not np.all(np.isfinite(v)):
        raise EvalError(f"non-finite angle from {as_expr(expr).to_text()}")
    return v


def bind(expr, gamma, tau):
    """Fold an expression to a Const at a concrete (gamma, tau)."""
    return Const(float(evaluate(expr, gamma, tau)))


def substitute_genes(expr, genes):
    """Replace every Gene node by the matching constant from ``genes``."""
    if isinstance(expr, Gene):
        return Const(float(genes[expr.index]))
    if isinstance(expr, Add):
        return Add(tuple(substitute_genes(t, genes) for t in expr.terms))
    if isinstance(expr, Neg):
        return Neg(substitute_genes(expr.arg, genes))
    if isinstance(expr, Mul):
        return Mul(substitute_genes(expr.left, genes), substitute_genes(expr.right, genes))
    if isinstance(expr, Div):
        return Div(substitute_genes(expr.left, genes), substitute_genes(expr.right, genes))
    if isinstance(expr, Func):
        return Func(expr.name, substitute_genes(expr.arg, genes))
    return expr


def parse(text, line=0, column_offset=0):
    """Parse closed arithmetic over literals, gamma, tau, pi, cos, sin, exp.

    Constant sub-expressions are folded so that printed-then-parsed trees
    evaluate bit-identically to the originals.
    """
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        col = (exc.offset or 1) + column_offset
        raise ParseError(f"bad expression {text!r}: {exc.msg}", line, col) from None
    return _convert(tree.body, text, line, column_offset)


def _convert(node, text, line, off):
    def fail(msg):
        raise ParseError(msg, line, off + getattr(node, "col_offset", 0) + 1)

    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            fail(f"unsupported literal {node.value!r}")
        return Const(float(node.value))
    if isinstance(node, ast.Name):
        if node.id == "pi":
            return PI
        if node.id in _VARS:
            return Var(node.id)
        if node.id.startswith("gene") and node.id[4:].isdigit():
            return Gene(int(node.id[4:]))
        fail(f"unknown name {node.id!r}")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        arg = _convert(node.operand, text, line, off)
        if isinstance(node.op, ast.UAdd):
            return arg
        return Const(-arg.value) if isinstance(arg, Const) else Neg(arg)
    if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div)):
        left = _convert(node.left, text, line, off)
        right = _convert(node.right, text, line, off)
        if isinstance(left, Const) and isinstance(right, Const):
            a, b = left.value, right.value
            if isinstance(node.op, ast.Add):
                return Const(a + b)
            if isinstance(node.op, ast.Sub):
                return Const(a - b)
            if isinstance(node.op, ast.Mult):
                return Const(a * b)
            if b == 0:
                fail("division by zero")
            return Const(a / b)
        if isinstance(node.op, ast.Add):
            lt = left.terms if isinstance(left, Add) and _is_paren_free(node.left) else (left,)
            return Add(lt + (right,))
        if isinstance(node.op, ast.Sub):
            return Add((left, Neg(right)))
        if isinstance(node.op, ast.Mult):
            return Mul(left, right)
        return Div(left, right)
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
        if node.func.id not in _FUNCS or len(node.args) != 1 or node.keywords:
            fail(f"unsupported call {ast.unparse(node)!r}")
        arg = _convert(node.args[0], text, line, off)
        if isinstance(arg, Const):
            return Const(float(_FUNCS[node.func.id](arg.value)))
        return Func(node.func.id, arg)
    fail(f"unsupported syntax {ast.unparse(node)!r}")


def _is_paren_free(node):
    return isinstance(node, ast.BinOp) and isinstance(node.op, ast.Add)
