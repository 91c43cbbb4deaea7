"""Parsing and printing of exact expressions.

The grammar is a small arithmetic language over the variables of a table:

    expr     := term (('+' | '-') term)*
    term     := factor (('*' | '/') factor)*
    factor   := '-' factor | atom ('^' signed_integer)?
    atom     := rational | identifier | 'log' '(' identifier ')'
              | '(' expr ')'
    rational := integer ('/' positive_integer)?

A rational literal is consumed greedily with two tokens of lookahead, so
``3/2`` is one literal rather than a quotient.  Negative exponents apply to
generator variables only, and ``log`` applies to generator variables only.
Whitespace is insignificant.  Printing produces a string that parses back to
an equal expression.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .expr import GENERATOR, ExprError, LogExpr, RatFunc, VarTable


class ParseError(ValueError):
    """Raised on malformed input, with the character position of the fault."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


_OPS = set("+-*/^()")


def tokenize(text: str) -> list[_Token]:
    """Split input into integer, identifier, and operator tokens."""
    out: list[_Token] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            out.append(_Token("int", text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(_Token("name", text[i:j], i))
            i = j
            continue
        if ch in _OPS:
            out.append(_Token("op", ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    out.append(_Token("end", "", n))
    return out


class _Parser:
    def __init__(self, text: str, table: VarTable):
        self.table = table
        self.toks = tokenize(text)
        self.k = 0

    def peek(self, ahead: int = 0) -> _Token:
        j = min(self.k + ahead, len(self.toks) - 1)
        return self.toks[j]

    def next(self) -> _Token:
        tok = self.toks[self.k]
        if tok.kind != "end":
            self.k += 1
        return tok

    def expect_op(self, op: str) -> _Token:
        tok = self.next()
        if tok.kind != "op" or tok.text != op:
            raise ParseError(f"expected {op!r}, found {tok.text or 'end of input'!r}", tok.pos)
        return tok

    def parse(self) -> LogExpr:
        value = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected trailing input {tok.text!r}", tok.pos)
        return value

    def expr(self) -> LogExpr:
        value = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.next().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> LogExpr:
        value, _ = self.factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.next()
            rhs, _ = self.factor()
            if op.text == "*":
                value = value * rhs
            else:
                if rhs.is_zero():
                    raise ParseError("division by zero", op.pos)
                value = value / rhs
        return value

    def factor(self) -> tuple[LogExpr, bool]:
        if self.peek().kind == "op" and self.peek().text == "-":
            self.next()
            value, _ = self.factor()
            return -value, False
        value, is_gen = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            caret = self.next()
            e = self.signed_integer()
            if e < 0 and not is_gen:
                raise ParseError("negative exponents apply to generator variables only",
                                 caret.pos)
            try:
                value = value ** e
            except (ExprError, ZeroDivisionError) as err:
                raise ParseError(str(err), caret.pos) from None
            return value, False
        return value, is_gen

    def signed_integer(self) -> int:
        tok = self.next()
        sign = 1
        if tok.kind == "op" and tok.text == "-":
            sign = -1
            tok = self.next()
        if tok.kind != "int":
            raise ParseError("expected an integer exponent", tok.pos)
        return sign * int(tok.text)

    def atom(self) -> tuple[LogExpr, bool]:
        tok = self.next()
        if tok.kind == "op" and tok.text == "(":
            value = self.expr()
            self.expect_op(")")
            return value, False
        if tok.kind == "int":
            num = int(tok.text)
            if (self.peek().kind == "op" and self.peek().text == "/"
                    and self.peek(1).kind == "int"):
                self.next()
                den_tok = self.next()
                den = int(den_tok.text)
                if den == 0:
                    raise ParseError("zero denominator in rational literal", den_tok.pos)
                return LogExpr(RatFunc.const(self.table, Fraction(num, den))), False
            return LogExpr(RatFunc.const(self.table, Fraction(num))), False
        if tok.kind == "name":
            if tok.text == "log" and self.peek().kind == "op" and self.peek().text == "(":
                self.next()
                arg = self.next()
                if arg.kind != "name":
                    raise ParseError("log takes a single variable", arg.pos)
                if not self.table.has(arg.text):
                    raise ParseError(f"unknown variable {arg.text!r}", arg.pos)
                idx = self.table.index(arg.text)
                if self.table.kind(idx) != GENERATOR:
                    raise ParseError(f"log argument {arg.text!r} is not a generator", arg.pos)
                self.expect_op(")")
                return LogExpr.log(self.table, arg.text), False
            if not self.table.has(tok.text):
                raise ParseError(f"unknown variable {tok.text!r}", tok.pos)
            idx = self.table.index(tok.text)
            value = LogExpr(RatFunc.var(self.table, tok.text))
            return value, self.table.kind(idx) == GENERATOR
        raise ParseError(f"unexpected token {tok.text or 'end of input'!r}", tok.pos)


def parse_expression(text: str, table: VarTable) -> LogExpr:
    """Parse a string into a LogExpr over the given table."""
    return _Parser(text, table).parse()


def parse_ratfunc(text: str, table: VarTable) -> RatFunc:
    """Parse a string that must denote a log-free rational expression."""
    value = parse_expression(text, table)
    if value.has_logs():
        raise ParseError("expression must not contain log terms", 0)
    return value.as_ratfunc()


def to_string(expr) -> str:
    """Canonical printed form; parse_expression(to_string(x)) equals x."""
    return str(expr)
