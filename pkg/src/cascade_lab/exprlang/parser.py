"""Recursive-descent parser for the expression grammar.

Grammar (no implicit multiplication)::

    sum    := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right associative
    atom   := NUMBER | NAME | NAME '(' sum ')' | '(' sum ')'

NAME followed by '(' is a function application and must be one of
sin, cos, exp, ln, sqrt.  Errors carry the 0-based character offset.
"""

from __future__ import annotations

import re
from typing import NamedTuple

from .nodes import Bin, Call, Expr, ExprError, FUNCTION_NAMES, Neg, Num, Var


class ParseError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class UnknownFunctionError(ParseError):
    pass


class _Token(NamedTuple):
    kind: str  # "num", "name", "op", "end"
    text: str
    pos: int


_NUM_RE = re.compile(r"\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_OP_CHARS = "+-*/^()"


def _tokenize(src: str) -> list[_Token]:
    tokens = []
    i = 0
    n = len(src)
    while i < n:
        ch = src[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and src[i + 1].isdigit()):
            m = _NUM_RE.match(src, i)
            tokens.append(_Token("num", m.group(), i))
            i = m.end()
            continue
        if ch.isalpha() or ch == "_":
            m = _NAME_RE.match(src, i)
            tokens.append(_Token("name", m.group(), i))
            i = m.end()
            continue
        if ch in _OP_CHARS:
            tokens.append(_Token("op", ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, char: str) -> None:
        tok = self.peek()
        if tok.kind == "op" and tok.text == char:
            self.advance()
            return
        raise ParseError(f"expected '{char}'", tok.pos)

    def at_op(self, chars: str) -> bool:
        tok = self.peek()
        return tok.kind == "op" and tok.text in chars

    def parse_sum(self) -> Expr:
        e = self.parse_term()
        while self.at_op("+-"):
            op = self.advance().text
            e = Bin(op, e, self.parse_term())
        return e

    def parse_term(self) -> Expr:
        e = self.parse_unary()
        while self.at_op("*/"):
            op = self.advance().text
            e = Bin(op, e, self.parse_unary())
        return e

    def parse_unary(self) -> Expr:
        if self.at_op("-"):
            self.advance()
            return Neg(self.parse_unary())
        return self.parse_power()

    def parse_power(self) -> Expr:
        base = self.parse_atom()
        if self.at_op("^"):
            self.advance()
            return Bin("^", base, self.parse_unary())
        return base

    def parse_atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "name":
            self.advance()
            if self.at_op("("):
                if tok.text not in FUNCTION_NAMES:
                    raise UnknownFunctionError(
                        f"unknown function {tok.text!r}", tok.pos
                    )
                self.advance()
                arg = self.parse_sum()
                self.expect_op(")")
                return Call(tok.text, arg)
            return Var(tok.text)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            e = self.parse_sum()
            self.expect_op(")")
            return e
        if tok.kind == "end":
            raise ParseError("unexpected end of input", tok.pos)
        raise ParseError(f"unexpected {tok.text!r}", tok.pos)


def parse(src: str) -> Expr:
    """Parse source text into an expression tree.

    Raises ParseError (with a 0-based character offset) on malformed input
    and UnknownFunctionError for a call to anything outside the five
    supported functions.
    """
    if not src or not src.strip():
        raise ParseError("empty expression", 0)
    parser = _Parser(_tokenize(src))
    e = parser.parse_sum()
    tok = parser.peek()
    if tok.kind != "end":
        raise ParseError(f"unexpected {tok.text!r} after expression", tok.pos)
    return e
