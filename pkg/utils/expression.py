"""Arithmetic expressions over coordinates, compiled to numpy callables.

Grammar: numbers, pi, e, coordinate names x y z, the operators + - * / ^ **,
unary minus, parentheses and the functions sin cos tan exp log sqrt abs sign.
Every expression carries a symbolic derivative so convergence runs only need
the function itself.
"""
import logging
import math
import re
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from utils.errors import EvaluationError, ExpressionError

logger = logging.getLogger(__name__)

VARIABLES = ("x", "y", "z")
CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "sign": np.sign,
}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>\*\*|[-+*/^(),]))"
)


# AST

class Node:
    def eval(self, env: Dict[str, np.ndarray]):
        raise NotImplementedError

    def diff(self, var: str) -> "Node":
        raise NotImplementedError

    def depends_on(self, var: str) -> bool:
        return False


@dataclass(frozen=True)
class Num(Node):
    value: float

    def eval(self, env):
        return self.value

    def diff(self, var):
        return ZERO

    def __str__(self):
        return repr(self.value) if self.value >= 0 else f"({self.value!r})"


@dataclass(frozen=True)
class Var(Node):
    name: str

    def eval(self, env):
        try:
            return env[self.name]
        except KeyError:
            raise EvaluationError(f"Coordinate '{self.name}' not available for this geometry")

    def diff(self, var):
        return ONE if self.name == var else ZERO

    def depends_on(self, var):
        return self.name == var

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Neg(Node):
    arg: Node

    def eval(self, env):
        return -self.arg.eval(env)

    def diff(self, var):
        return neg(self.arg.diff(var))

    def depends_on(self, var):
        return self.arg.depends_on(var)

    def __str__(self):
        return f"(-{self.arg})"


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node

    def eval(self, env):
        a, b = self.left.eval(env), self.right.eval(env)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            return np.divide(a, b)
        return np.power(a, b)

    def diff(self, var):
        u, v = self.left, self.right
        du, dv = u.diff(var), v.diff(var)
        if self.op == "+":
            return add(du, dv)
        if self.op == "-":
            return sub(du, dv)
        if self.op == "*":
            return add(mul(du, v), mul(u, dv))
        if self.op == "/":
            return div(sub(mul(du, v), mul(u, dv)), power(v, Num(2.0)))
        if not v.depends_on(var):
            return mul(mul(v, power(u, sub(v, ONE))), du)
        # u^v = exp(v log u)
        return mul(self, add(mul(dv, Call("log", u)), div(mul(v, du), u)))

    def depends_on(self, var):
        return self.left.depends_on(var) or self.right.depends_on(var)

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Call(Node):
    name: str
    arg: Node

    def eval(self, env):
        return FUNCTIONS[self.name](self.arg.eval(env))

    def diff(self, var):
        u = self.arg
        du = u.diff(var)
        if du == ZERO:
            return ZERO
        outer = {
            "sin": lambda: Call("cos", u),
            "cos": lambda: neg(Call("sin", u)),
            "tan": lambda: div(ONE, power(Call("cos", u), Num(2.0))),
            "exp": lambda: self,
            "log": lambda: div(ONE, u),
            "sqrt": lambda: div(ONE, mul(Num(2.0), self)),
            "abs": lambda: Call("sign", u),
            "sign": lambda: ZERO,
        }[self.name]()
        return mul(outer, du)

    def depends_on(self, var):
        return self.arg.depends_on(var)

    def __str__(self):
        return f"{self.name}({self.arg})"


ZERO = Num(0.0)
ONE = Num(1.0)


# Folding constructors keep derivatives readable

def _const(node: Node):
    return node.value if isinstance(node, Num) else None


def neg(a: Node) -> Node:
    c = _const(a)
    if c is not None:
        return Num(-c)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def add(a: Node, b: Node) -> Node:
    ca, cb = _const(a), _const(b)
    if ca is not None and cb is not None:
        return Num(ca + cb)
    if ca == 0.0:
        return b
    if cb == 0.0:
        return a
    return BinOp("+", a, b)


def sub(a: Node, b: Node) -> Node:
    ca, cb = _const(a), _const(b)
    if ca is not None and cb is not None:
        return Num(ca - cb)
    if cb == 0.0:
        return a
    if ca == 0.0:
        return neg(b)
    return BinOp("-", a, b)


def mul(a: Node, b: Node) -> Node:
    ca, cb = _const(a), _const(b)
    if ca is not None and cb is not None:
        return Num(ca * cb)
    if ca == 0.0 or cb == 0.0:
        return ZERO
    if ca == 1.0:
        return b
    if cb == 1.0:
        return a
    return BinOp("*", a, b)


def div(a: Node, b: Node) -> Node:
    if _const(a) == 0.0:
        return ZERO
    if _const(b) == 1.0:
        return a
    return BinOp("/", a, b)


def power(a: Node, b: Node) -> Node:
    cb = _const(b)
    if cb == 0.0:
        return ONE
    if cb == 1.0:
        return a
    return BinOp("^", a, b)


# Parser

def tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if not match or match.end() == pos:
            raise ExpressionError(f"Unexpected character at {pos}: {text[pos:pos + 10]!r}")
        kind = match.lastgroup
        tokens.append((kind, match.group(kind), match.start(kind)))
        pos = match.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    # (left, right) binding power; ^ is right associative
    BINDING = {"+": (10, 11), "-": (10, 11), "*": (20, 21), "/": (20, 21), "^": (41, 40), "**": (41, 40)}
    UNARY = 30

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, value: str):
        kind, text, at = self.advance()
        if text != value:
            raise ExpressionError(f"Expected '{value}' at {at}, found {text or 'end of input'!r}")

    def parse(self) -> Node:
        node = self.expression(0)
        kind, text, at = self.peek()
        if kind != "end":
            raise ExpressionError(f"Unexpected {text!r} at {at}")
        return node

    def expression(self, min_bp: int) -> Node:
        left = self.prefix()
        while True:
            kind, op, _ = self.peek()
            if kind != "op" or op not in self.BINDING:
                break
            left_bp, right_bp = self.BINDING[op]
            if left_bp < min_bp:
                break
            self.advance()
            right = self.expression(right_bp)
            left = BinOp("^" if op == "**" else op, left, right)
        return left

    def prefix(self) -> Node:
        kind, text, at = self.advance()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expression(0)
                self.expect(")")
                return Call(text, arg)
            if text in CONSTANTS:
                return Num(CONSTANTS[text])
            if text in VARIABLES:
                return Var(text)
            raise ExpressionError(f"Unknown name {text!r} at {at}")
        if text == "-":
            return Neg(self.expression(self.UNARY))
        if text == "+":
            return self.expression(self.UNARY)
        if text == "(":
            node = self.expression(0)
            self.expect(")")
            return node
        raise ExpressionError(f"Unexpected {text or 'end of input'!r} at {at}")


@dataclass(frozen=True)
class Expression:
    """Compiled expression; call it on an (N, d) coordinate array"""

    text: str
    tree: Node

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        env = {name: X[:, k] for k, name in enumerate(VARIABLES[:X.shape[1]])}
        with np.errstate(all="ignore"):
            out = np.asarray(self.tree.eval(env), dtype=float)
        return np.broadcast_to(out, (X.shape[0],)).copy()

    def diff(self, var: str = "x") -> "Expression":
        if var not in VARIABLES:
            raise ExpressionError(f"Cannot differentiate with respect to {var!r}")
        tree = self.tree.diff(var)
        return Expression(str(tree), tree)

    def gradient(self, dim: int) -> Tuple["Expression", ...]:
        return tuple(self.diff(v) for v in VARIABLES[:dim])

    def variables(self) -> Tuple[str, ...]:
        return tuple(v for v in VARIABLES if self.tree.depends_on(v))

    def __str__(self):
        return self.text


def parse_expression(text: str) -> Expression:
    """Parse text into an Expression, raising ExpressionError on bad input"""
    if not isinstance(text, str) or not text.strip():
        raise ExpressionError("Empty expression")
    tree = _Parser(text).parse()
    logger.debug(f"Parsed {text!r} as {tree}")
    return Expression(text.strip(), tree)
