"""A tiny arithmetic expression language for exponent functions.

Grammar::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | '+' unary | atom
    atom    := NUMBER | NAME | NAME '(' args ')' | '(' expr ')'
    args    := expr (',' expr)*

Names are the coordinates ``x`` and ``y``, the constant ``pi``, and the
functions ``sin``, ``cos``, ``exp``, ``abs``, ``min``, ``max`` and
``smoothstep(a, b, t)``.  Parsing produces a small tree that can be evaluated
on numpy arrays and printed back to canonical text.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ExpressionSyntaxError",
    "parse",
    "smoothstep",
    "Node",
]


class ExpressionSyntaxError(ValueError):
    """Raised for malformed expressions; ``position`` is a character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


def _mollifier(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smoothstep(a, b, t):
    """C-infinity step rising from 0 at ``t <= a`` to 1 at ``t >= b``.

    Built from the mollifier ``exp(-1/s)``; strictly increasing on ``(a, b)``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    s = (np.asarray(t, dtype=float) - a) / (b - a)
    left = _mollifier(s)
    right = _mollifier(1.0 - s)
    return left / (left + right)


_FUNCTIONS = {
    "sin": (1, np.sin),
    "cos": (1, np.cos),
    "exp": (1, np.exp),
    "abs": (1, np.abs),
    "min": (2, np.minimum),
    "max": (2, np.maximum),
    "smoothstep": (3, smoothstep),
}
_CONSTANTS = {"pi": math.pi}
_VARIABLES = ("x", "y")

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/(),]))"
)


@dataclass(frozen=True)
class Node:
    kind: str  # "num", "var", "const", "neg", "bin", "call"
    value: object = None
    children: tuple = ()

    def evaluate(self, coords: dict):
        if self.kind == "num":
            return self.value
        if self.kind == "const":
            return _CONSTANTS[self.value]
        if self.kind == "var":
            if self.value not in coords:
                raise KeyError(f"variable {self.value!r} is not defined on this grid")
            return coords[self.value]
        if self.kind == "neg":
            return -self.children[0].evaluate(coords)
        if self.kind == "bin":
            lhs = self.children[0].evaluate(coords)
            rhs = self.children[1].evaluate(coords)
            if self.value == "+":
                return lhs + rhs
            if self.value == "-":
                return lhs - rhs
            if self.value == "*":
                return lhs * rhs
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.divide(lhs, rhs)
        func = _FUNCTIONS[self.value][1]
        return func(*(c.evaluate(coords) for c in self.children))

    def variables(self) -> set:
        if self.kind == "var":
            return {self.value}
        found = set()
        for child in self.children:
            found |= child.variables()
        return found

    def to_text(self) -> str:
        """Canonical, fully parenthesized text that parses back to this tree."""
        if self.kind == "num":
            return repr(float(self.value))
        if self.kind in ("var", "const"):
            return self.value
        if self.kind == "neg":
            return f"(-{self.children[0].to_text()})"
        if self.kind == "bin":
            return f"({self.children[0].to_text()} {self.value} {self.children[1].to_text()})"
        args = ", ".join(c.to_text() for c in self.children)
        return f"{self.value}({args})"

    def __str__(self):
        return self.to_text()


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = _TOKEN.match(text, pos)
        if match is None:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExpressionSyntaxError(f"unexpected character {text[start]!r}", start)
        kind = match.lastgroup
        start = match.start(kind)
        tokens.append((kind, match.group(kind), start))
        pos = match.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.index = 0

    def peek(self):
        return self.tokens[self.index]

    def advance(self):
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def expect_op(self, op, opened_at=None):
        kind, value, pos = self.peek()
        if kind == "op" and value == op:
            return self.advance()
        if op == ")" and opened_at is not None and kind in ("end", "op") and value in ("", ","):
            raise ExpressionSyntaxError("unbalanced parenthesis", opened_at)
        raise ExpressionSyntaxError(f"expected {op!r}", pos)

    def parse(self):
        node = self.expr()
        kind, value, pos = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {value!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.advance()[1]
            node = Node("bin", op, (node, self.term()))
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.advance()[1]
            node = Node("bin", op, (node, self.unary()))
        return node

    def unary(self):
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return Node("neg", None, (self.unary(),))
        if kind == "op" and value == "+":
            self.advance()
            return self.unary()
        return self.atom()

    def atom(self):
        kind, value, pos = self.advance()
        if kind == "num":
            return Node("num", float(value))
        if kind == "name":
            if value in _FUNCTIONS:
                arity = _FUNCTIONS[value][0]
                self.expect_op("(")
                inner = self.peek()[2]
                args = [self.expr()]
                while self.peek()[0] == "op" and self.peek()[1] == ",":
                    self.advance()
                    args.append(self.expr())
                self.expect_op(")", opened_at=inner)
                if len(args) != arity:
                    raise ExpressionSyntaxError(
                        f"{value} takes {arity} argument(s), got {len(args)}", pos
                    )
                return Node("call", value, tuple(args))
            if value in _CONSTANTS:
                return Node("const", value)
            if value in _VARIABLES:
                return Node("var", value)
            raise ExpressionSyntaxError(f"unknown name {value!r}", pos)
        if kind == "op" and value == "(":
            inner = self.peek()[2]
            node = self.expr()
            self.expect_op(")", opened_at=inner)
            return node
        if kind == "end":
            raise ExpressionSyntaxError("unexpected end of expression", pos)
        raise ExpressionSyntaxError(f"unexpected {value!r}", pos)


def parse(text: str) -> Node:
    """Parse ``text`` into an expression tree.

    Raises
    ------
    ExpressionSyntaxError
        With the offending character offset.
    """
    return _Parser(text).parse()
