"""Observable expressions: parser, pretty-printer and value-with-gradient evaluator.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' signed)*          left associative
    signed := '-' signed | atom
    atom   := NUMBER | IDENT | FUNC '(' expr ')' | '(' expr ')'

Identifiers are ``x<i>``, ``e<i>`` (base coordinates and momenta, 1-based),
``l<i>`` (covector coordinates), ``lam2`` (the dual norm squared of lambda) and
``kin`` (the base kinetic energy 1/2 eta^T g_base^{-1} eta).
"""
import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import EvalError, ParseError

FUNCTIONS = ("sin", "cos", "exp", "sqrt")
_TOKEN = re.compile(r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))")
_IDENT = re.compile(r"^(?:(?P<kind>[xel])(?P<idx>[1-9]\d*)|lam2|kin)$")


# -- syntax tree ----------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Bin:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


# -- parser ---------------------------------------------------------------------

def _tokenize(text):
    tokens, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        while text[pos].isspace():
            pos += 1
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        tokens.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


def _describe(val):
    return repr(val) if val else "end of input"


class _Parser:
    def __init__(self, text, b, m):
        self.tokens = _tokenize(text)
        self.i = 0
        self.b, self.m = b, m

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value:
            raise ParseError(f"expected {value!r}, found {_describe(val)}", pos)

    def parse(self):
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {_describe(val)}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            node = Bin(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            node = Bin(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        while self.peek()[1] == "^":
            self.take()
            node = Bin("^", node, self.signed())
        return node

    def signed(self):
        if self.peek()[1] == "-":
            self.take()
            return Neg(self.signed())
        return self.atom()

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "id":
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            self.check_ident(val, pos)
            return Var(val)
        if val == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(f"unexpected {_describe(val)}", pos)

    def check_ident(self, name, pos):
        m = _IDENT.match(name)
        if not m:
            raise ParseError(f"unknown identifier {name!r}", pos)
        kind = m.group("kind")
        if kind is None:
            return
        idx = int(m.group("idx"))
        limit = self.m if kind == "l" else self.b
        if limit is not None and idx > limit:
            raise ParseError(f"identifier {name!r} out of range (max index {limit})", pos)


def parse_observable(text, b=None, m=None):
    """Parse ``text``; with ``b``/``m`` given, indices are range-checked."""
    return ObservableExpr(text, _Parser(text, b, m).parse())


@dataclass(frozen=True)
class ObservableExpr:
    source: str
    tree: object

    def pretty(self):
        return pretty(self.tree)

    def variables(self):
        return sorted(_collect_vars(self.tree))

    def value(self, env):
        """Evaluate with ``env`` mapping identifiers to floats."""
        return evaluate(self.tree, {k: Dual.const(v, 0) for k, v in env.items()}, 0).val


def _collect_vars(node):
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, (Neg, Call)):
        return _collect_vars(node.arg)
    if isinstance(node, Bin):
        return _collect_vars(node.left) | _collect_vars(node.right)
    return set()


# -- pretty printer -------------------------------------------------------------

def _fmt_num(v):
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def pretty(node):
    """Canonical text with minimal parentheses; parse(pretty(t)) == t."""
    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({pretty(node.arg)})"
    if isinstance(node, Neg):
        inner = pretty(node.arg)
        if _prec(node.arg) < _PREC["neg"]:
            inner = f"({inner})"
        return "-" + inner
    p = _PREC[node.op]
    left, right = pretty(node.left), pretty(node.right)
    if _prec(node.left) < p:
        left = f"({left})"
    # right operand: same precedence needs parentheses (left associativity);
    # a negated exponent is parenthesized for readability
    if _prec(node.right) <= p or (node.op == "^" and isinstance(node.right, Neg)):
        right = f"({right})"
    if node.op == "^":
        return f"{left}^{right}"
    return f"{left} {node.op} {right}"


def _prec(node):
    if isinstance(node, Bin):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC["neg"]
    return 10


# -- forward-mode evaluation ----------------------------------------------------

class Dual:
    """Value with a gradient vector; supports the grammar's operations."""

    __slots__ = ("val", "grad")

    def __init__(self, val, grad):
        self.val = float(val)
        self.grad = grad

    @staticmethod
    def const(v, n):
        return Dual(v, np.zeros(n))

    def __add__(self, o):
        return Dual(self.val + o.val, self.grad + o.grad)

    def __sub__(self, o):
        return Dual(self.val - o.val, self.grad - o.grad)

    def __mul__(self, o):
        return Dual(self.val * o.val, self.grad * o.val + o.grad * self.val)

    def __truediv__(self, o):
        if o.val == 0.0:
            raise EvalError("division by zero")
        return Dual(self.val / o.val, (self.grad * o.val - o.grad * self.val) / o.val ** 2)

    def __neg__(self):
        return Dual(-self.val, -self.grad)

    def __pow__(self, o):
        a, b = self.val, o.val
        if not np.any(o.grad) and b == int(b):
            n = int(b)
            if a == 0.0 and n < 0:
                raise EvalError("zero raised to a negative power")
            dv = n * a ** (n - 1) if n != 0 else 0.0
            return Dual(a ** n, self.grad * dv)
        if a <= 0.0:
            raise EvalError("non-integer power of a non-positive base")
        v = a ** b
        return Dual(v, v * (o.grad * math.log(a) + self.grad * b / a))


def _apply(func, d):
    v = d.val
    if func == "sin":
        return Dual(math.sin(v), d.grad * math.cos(v))
    if func == "cos":
        return Dual(math.cos(v), -d.grad * math.sin(v))
    if func == "exp":
        try:
            e = math.exp(v)
        except OverflowError:
            raise EvalError("exp overflow") from None
        return Dual(e, d.grad * e)
    if func == "sqrt":
        if v < 0.0:
            raise EvalError("sqrt of a negative number")
        if v == 0.0:
            if np.any(d.grad):
                raise EvalError("sqrt is not differentiable at 0")
            return Dual(0.0, d.grad)
        s = math.sqrt(v)
        return Dual(s, d.grad / (2.0 * s))
    raise EvalError(f"unknown function {func}")


def evaluate(node, env, n):
    """Evaluate ``node`` with ``env`` mapping identifiers to :class:`Dual`."""
    if isinstance(node, Num):
        return Dual.const(node.value, n)
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise EvalError(f"identifier {node.name!r} not available here") from None
    if isinstance(node, Neg):
        return -evaluate(node.arg, env, n)
    if isinstance(node, Call):
        return _apply(node.func, evaluate(node.arg, env, n))
    a, b = evaluate(node.left, env, n), evaluate(node.right, env, n)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    return a ** b
