"""Minimal arithmetic expression grammar for coefficient and data fields.

Grammar (recursive descent):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := number | variable | func '(' expr ')' | '(' expr ')'

Functions: sqrt, exp.  Variables: x, t, y2 ... y9.  Expressions compile to
closures over numpy arrays, so they broadcast over grid meshes.
"""

from __future__ import annotations

import re

import numpy as np

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)

_FUNCS = {"sqrt": np.sqrt, "exp": np.exp}
_VARS = ("x", "t") + tuple(f"y{i}" for i in range(2, 10))


class ExpressionError(ValueError):
    pass


def _tokenize(text: str) -> list:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExpressionError(f"bad character at position {pos} in {text!r}")
        pos = m.end()
        if m.group("num") is not None:
            tokens.append(("num", float(m.group("num"))))
        elif m.group("name") is not None:
            tokens.append(("name", m.group("name")))
        else:
            tokens.append(("op", m.group("op")))
    tokens.append(("end", None))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise ExpressionError(f"expected {op!r} in {self.text!r}")

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            raise ExpressionError(f"trailing input in {self.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            _, op = self.take()
            rhs = self.term()
            node = ("add" if op == "+" else "sub", node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            _, op = self.take()
            rhs = self.unary()
            node = ("mul" if op == "*" else "div", node, rhs)
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return ("neg", self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            return ("pow", node, self.unary())
        return node

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return ("const", val)
        if kind == "name":
            if val in _FUNCS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return ("call", val, arg)
            if val in _VARS:
                return ("var", val)
            raise ExpressionError(f"unknown name {val!r} in {self.text!r}")
        if (kind, val) == ("op", "("):
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExpressionError(f"unexpected token in {self.text!r}")


def _eval(node, env):
    op = node[0]
    if op == "const":
        return node[1]
    if op == "var":
        try:
            return env[node[1]]
        except KeyError:
            raise ExpressionError(f"variable {node[1]} not available here") from None
    if op == "neg":
        return -_eval(node[1], env)
    if op == "call":
        return _FUNCS[node[1]](_eval(node[2], env))
    a = _eval(node[1], env)
    b = _eval(node[2], env)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    if op == "pow":
        return a ** b
    raise ExpressionError(f"corrupt node {node!r}")


def _uses_var(node, name: str) -> bool:
    op = node[0]
    if op == "var":
        return node[1] == name
    if op in ("const",):
        return False
    return any(_uses_var(child, name) for child in node[1:] if isinstance(child, tuple))


class CompiledExpression:
    """Expression compiled to a numpy-broadcasting callable f(x, y..., t)."""

    def __init__(self, text: str):
        self.text = text.strip()
        self.node = _Parser(self.text).parse()

    @property
    def time_dependent(self) -> bool:
        return _uses_var(self.node, "t")

    def __call__(self, x, *coords):
        t = coords[-1]
        ys = coords[:-1]
        env = {"x": x, "t": t}
        for i, yi in enumerate(ys):
            env[f"y{i + 2}"] = yi
        return _eval(self.node, env)

    def __repr__(self):
        return f"CompiledExpression({self.text!r})"


def compile_expression(text: str) -> CompiledExpression:
    return CompiledExpression(text)
