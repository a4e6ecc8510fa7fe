"""Tiny arithmetic expression language for radial functions of ``r``.

Grammar (whitespace ignored)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' unary)?          # right associative
    primary := NUMBER | 'r' | 'pi' | 'e' | PARAM
             | FUNC '(' expr ')' | '(' expr ')'

``^`` binds tighter than unary minus, so ``-2^2`` is ``-4`` and
``2^3^2`` is ``2^9``.  Evaluation works on floats and numpy arrays alike;
anything that would produce a non-finite value is reported as a
:class:`DomainError` naming the offending subexpression.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

import numpy as np

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
}
CONSTANTS = {"pi": math.pi, "e": math.e}
VARIABLE = "r"


class ExprError(Exception):
    """Base class for expression errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int, expected: Iterable[str] = ()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = f"{message} at byte {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(detail)


class UnknownFunctionError(ExprError):
    def __init__(self, name: str, offset: int):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown function {name!r} at byte {offset}")


class UnknownIdentifierError(ExprError):
    def __init__(self, name: str, offset: int):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier {name!r} at byte {offset}")


class UnboundParameterError(ExprError):
    def __init__(self, names):
        self.names = tuple(sorted(names))
        super().__init__(f"unbound parameter(s): {', '.join(self.names)}")


class DomainError(ExprError, ArithmeticError):
    def __init__(self, message: str, subexpr: str):
        self.subexpr = subexpr
        super().__init__(f"{message} in {subexpr}")


# --- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Param, Const, Neg, BinOp, Call]


@dataclass(frozen=True)
class ExprAst:
    root: Node
    params: frozenset
    source: str = ""

    def __call__(self, r, params: Mapping[str, float] | None = None):
        return evaluate(self, r, params)

    def __str__(self) -> str:
        return to_source(self)


# --- tokenizer / parser ----------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(source: str):
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        if source[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.end() == pos:
            bad = pos + (len(source[pos:]) - len(source[pos:].lstrip()))
            raise ExprSyntaxError(
                f"unexpected character {source[bad]!r}",
                _byte_offset(source, bad),
                {"number", "identifier", "operator", "("},
            )
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), _byte_offset(source, start)))
        pos = m.end()
    tokens.append(("end", "", _byte_offset(source, len(source))))
    return tokens


def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


class _Parser:
    def __init__(self, source: str, params: frozenset):
        self.tokens = _tokenize(source)
        self.i = 0
        self.params = params
        self.used = set()

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, off = self.peek()
        if text != value or kind != "op":
            raise ExprSyntaxError(f"unexpected {text or 'end of input'!r}", off, {value})
        self.take()

    def parse(self) -> Node:
        node = self.expr()
        kind, text, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {text!r}", off, {"+", "-", "*", "/", "^", "end"})
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.primary()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def primary(self) -> Node:
        kind, text, off = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            if self.peek()[:2] == ("op", "("):
                if text not in FUNCTIONS:
                    raise UnknownFunctionError(text, off)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            if text == VARIABLE:
                return Var()
            if text in CONSTANTS:
                return Const(text)
            if text in self.params:
                self.used.add(text)
                return Param(text)
            if text in FUNCTIONS:
                raise ExprSyntaxError(f"function {text!r} needs an argument", self.peek()[2], {"("})
            raise UnknownIdentifierError(text, off)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExprSyntaxError(
            f"unexpected {text or 'end of input'!r}", off, {"number", "identifier", "(", "-"}
        )


def parse(source: str, params: Iterable[str] = ()) -> ExprAst:
    """Parse ``source`` into an :class:`ExprAst`.

    ``params`` lists identifiers that are accepted as named parameters; any
    other identifier besides ``r``, ``pi`` and ``e`` is rejected.
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    allowed = frozenset(params)
    clash = allowed & (set(FUNCTIONS) | set(CONSTANTS) | {VARIABLE})
    if clash:
        raise ExprError(f"parameter names shadow reserved words: {sorted(clash)}")
    p = _Parser(source, allowed)
    root = p.parse()
    return ExprAst(root, frozenset(p.used), source)


# --- printing --------------------------------------------------------------


def _fmt(node: Node) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return VARIABLE
    if isinstance(node, Param):
        return node.name
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Neg):
        return f"(-{_fmt(node.operand)})"
    if isinstance(node, BinOp):
        return f"({_fmt(node.left)} {node.op} {_fmt(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({_fmt(node.arg)})"
    raise TypeError(node)


def to_source(ast: ExprAst | Node) -> str:
    """Fully parenthesised source text; ``parse(to_source(a))`` rebuilds ``a``."""
    return _fmt(ast.root if isinstance(ast, ExprAst) else ast)


# --- evaluation ------------------------------------------------------------


def _check(value, node: Node, what: str = "non-finite result"):
    if not np.all(np.isfinite(value)):
        raise DomainError(what, _fmt(node))
    return value


def _eval(node: Node, r, env):
    if isinstance(node, Num):
        return np.float64(node.value)
    if isinstance(node, Var):
        return r
    if isinstance(node, Param):
        return np.float64(env[node.name])
    if isinstance(node, Const):
        return np.float64(CONSTANTS[node.name])
    if isinstance(node, Neg):
        return -_eval(node.operand, r, env)
    if isinstance(node, Call):
        x = _eval(node.arg, r, env)
        if node.func == "log" and np.any(x <= 0):
            raise DomainError("log of non-positive argument", _fmt(node))
        if node.func == "sqrt" and np.any(x < 0):
            raise DomainError("sqrt of negative argument", _fmt(node))
        with np.errstate(all="ignore"):
            return _check(FUNCTIONS[node.func](x), node)
    a = _eval(node.left, r, env)
    b = _eval(node.right, r, env)
    with np.errstate(all="ignore"):
        if node.op == "+":
            out = a + b
        elif node.op == "-":
            out = a - b
        elif node.op == "*":
            out = a * b
        elif node.op == "/":
            if np.any(b == 0):
                raise DomainError("division by zero", _fmt(node))
            out = a / b
        else:
            bad = (np.asarray(a) < 0) & (np.floor(b) != b)
            if np.any(bad):
                raise DomainError("negative base with non-integer exponent", _fmt(node))
            if np.any((np.asarray(a) == 0) & (np.asarray(b) < 0)):
                raise DomainError("division by zero", _fmt(node))
            out = np.power(a, b)
    return _check(out, node)


def evaluate(ast: ExprAst, r, params: Mapping[str, float] | None = None):
    """Evaluate at ``r`` (float or ndarray) with parameter bindings."""
    env = dict(params or {})
    missing = ast.params - env.keys()
    if missing:
        raise UnboundParameterError(missing)
    scalar = np.ndim(r) == 0
    rr = np.float64(r) if scalar else np.asarray(r, dtype=float)
    out = _eval(ast.root, rr, env)
    if scalar:
        return float(out)
    return np.broadcast_to(out, rr.shape).astype(float)


def central_difference(f, r: float) -> float:
    h = 1e-5 * max(1.0, abs(r))
    return (f(r + h) - f(r - h)) / (2 * h)


def derivative_deviation(f, fprime, sample) -> float:
    """Max relative gap between a central difference of ``f`` and ``fprime``.

    Works on any pair of scalar callables; see :func:`derivative_consistency`
    for the AST entry point.
    """
    worst = 0.0
    for r in sample:
        r = float(r)
        fd = central_difference(f, r)
        exact = float(fprime(r))
        worst = max(worst, abs(fd - exact) / max(1.0, abs(exact)))
    return worst


def derivative_consistency(f: ExprAst, fprime: ExprAst, sample, params=None) -> float:
    return derivative_deviation(
        lambda x: evaluate(f, x, params), lambda x: evaluate(fprime, x, params), sample
    )
