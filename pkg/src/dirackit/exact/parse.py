"""Recursive-descent parser for coefficient expressions.

Grammar (whitespace insignificant)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("+" | "-") unary | power
    power  := atom ("^" INTEGER)?
    atom   := INTEGER | NAME | "(" expr ")"

``^`` takes nonnegative integer literals only; rationals are written as
quotients such as ``3/4``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ratfun import Chart, RatFun

__all__ = ["ExprSyntaxError", "UnknownVariable", "parse_expr", "print_expr"]


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos} in {text!r}")
        self.text = text
        self.pos = pos


class UnknownVariable(ExprSyntaxError):
    pass


_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))")


@dataclass(frozen=True)
class _Tok:
    kind: str
    value: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(_Tok("end", "", n))
    return toks


class _Parser:
    def __init__(self, text: str, chart: Chart):
        self.text = text
        self.chart = chart
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        raise ExprSyntaxError(msg, self.text, tok.pos)

    def parse(self) -> RatFun:
        if self.peek().kind == "end":
            self.error("empty expression")
        value = self.expr()
        if self.peek().kind != "end":
            self.error(f"unexpected {self.peek().value!r}")
        return value

    def expr(self) -> RatFun:
        value = self.term()
        while self.peek().kind == "op" and self.peek().value in "+-":
            op = self.take().value
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> RatFun:
        value = self.unary()
        while self.peek().kind == "op" and self.peek().value in "*/":
            tok = self.take()
            rhs = self.unary()
            if tok.value == "*":
                value = value * rhs
            else:
                if rhs.is_zero():
                    self.error("division by zero", tok)
                value = value / rhs
        return value

    def unary(self) -> RatFun:
        tok = self.peek()
        if tok.kind == "op" and tok.value in "+-":
            self.take()
            operand = self.unary()
            return -operand if tok.value == "-" else operand
        return self.power()

    def power(self) -> RatFun:
        base = self.atom()
        if self.peek().kind == "op" and self.peek().value == "^":
            self.take()
            tok = self.take()
            if tok.kind != "int":
                self.error("exponent must be a nonnegative integer literal", tok)
            base = base ** int(tok.value)
        return base

    def atom(self) -> RatFun:
        tok = self.take()
        if tok.kind == "int":
            return self.chart.const(int(tok.value))
        if tok.kind == "name":
            if tok.value not in self.chart.vars:
                raise UnknownVariable(f"unknown variable {tok.value!r}", self.text, tok.pos)
            return self.chart.coord(self.chart.vars.index(tok.value))
        if tok.kind == "op" and tok.value == "(":
            value = self.expr()
            close = self.take()
            if close.kind != "op" or close.value != ")":
                self.error("expected ')'", close)
            return value
        if tok.kind == "end":
            self.error("unexpected end of expression", tok)
        self.error(f"unexpected {tok.value!r}", tok)


def parse_expr(text: str, chart: Chart) -> RatFun:
    """Parse ``text`` into a canonical rational function on ``chart``."""
    if not isinstance(text, str):
        if isinstance(text, int) and not isinstance(text, bool):
            return chart.const(text)
        raise TypeError(f"expression must be a string, got {type(text).__name__}")
    return _Parser(text, chart).parse()


def print_expr(f: RatFun) -> str:
    return str(f)
