"""Recursive-descent parser for the profile expression language.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := ('-')? power
    power  := atom ('^' factor)?
    atom   := number | identifier | identifier '(' expr ')' | '(' expr ')'

``^`` is right-associative and binds tighter than unary minus, so ``-x^2`` is
``-(x^2)`` while ``x^-2`` is ``x^(-2)``.  A minus directly in front of a bare
numeric literal produces a negative constant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .nodes import CALLABLE_FUNCTIONS, VARIABLE, Binary, Const, Expr, Param, Unary, Var

_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_PUNCT = {"+": "+", "*": "*", "/": "/", "^": "^", "(": "(", ")": ")", "-": "-", "−": "-"}


class ExprSyntaxError(ValueError):
    """Raised for malformed expression text.

    ``offset`` is the byte offset into the UTF-8 encoded input where parsing
    stopped; ``expected`` lists the tokens that would have been accepted.
    """

    def __init__(self, message: str, offset: int, expected: frozenset[str] = frozenset()):
        self.offset = offset
        self.expected = expected
        detail = f" (expected one of: {', '.join(sorted(expected))})" if expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class UnknownFunctionError(ExprSyntaxError):
    pass


@dataclass(frozen=True)
class _Token:
    kind: str  # number | ident | one of the punctuation symbols | end
    text: str
    offset: int  # byte offset


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    byte_pos = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            byte_pos += len(ch.encode())
            i += 1
            continue
        m = _NUMBER.match(text, i)
        if m:
            tokens.append(_Token("number", m.group(), byte_pos))
        else:
            m = _IDENT.match(text, i)
            if m:
                tokens.append(_Token("ident", m.group(), byte_pos))
            elif ch in _PUNCT:
                tokens.append(_Token(_PUNCT[ch], ch, byte_pos))
                byte_pos += len(ch.encode())
                i += 1
                continue
            else:
                raise ExprSyntaxError(f"unexpected character {ch!r}", byte_pos)
        byte_pos += len(m.group().encode())
        i = m.end()
    tokens.append(_Token("end", "", byte_pos))
    return tokens


_ATOM_START = frozenset({"number", "identifier", "("})
_FACTOR_START = _ATOM_START | {"-"}


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def fail(self, expected: frozenset[str]) -> ExprSyntaxError:
        t = self.tok
        what = "end of input" if t.kind == "end" else f"token {t.text!r}"
        return ExprSyntaxError(f"unexpected {what}", t.offset, expected)

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            raise self.fail(frozenset({"+", "-", "*", "/", "^", "end of input"}))
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.tok.kind in ("+", "-"):
            op = "add" if self.advance().kind == "+" else "sub"
            e = Binary(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.tok.kind in ("*", "/"):
            op = "mul" if self.advance().kind == "*" else "div"
            e = Binary(op, e, self.factor())
        return e

    def factor(self) -> Expr:
        if self.tok.kind == "-":
            self.advance()
            start = self.pos
            e = self.power()
            if isinstance(e, Const) and self.pos == start + 1:
                return Const(-e.value)
            return Unary("neg", e)
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "^":
            self.advance()
            return Binary("pow", base, self.factor())
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "number":
            self.advance()
            return Const(float(t.text))
        if t.kind == "ident":
            self.advance()
            if self.tok.kind == "(":
                if t.text not in CALLABLE_FUNCTIONS:
                    raise UnknownFunctionError(f"unknown function {t.text!r}", t.offset)
                self.advance()
                arg = self.expr()
                self.expect(")")
                return Unary(t.text, arg)
            if t.text == VARIABLE:
                return Var()
            if t.text in CALLABLE_FUNCTIONS:
                raise ExprSyntaxError(f"function {t.text!r} used without argument", t.offset, frozenset({"("}))
            return Param(t.text)
        if t.kind == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        raise self.fail(_FACTOR_START)

    def expect(self, kind: str) -> None:
        if self.tok.kind != kind:
            raise self.fail(frozenset({kind, "+", "-", "*", "/", "^"}))
        self.advance()


def parse(text: str) -> Expr:
    """Parse ``text`` into an expression tree."""
    return _Parser(text).parse()
