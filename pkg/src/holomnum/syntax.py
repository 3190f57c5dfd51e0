"""Tokenizer and recursive-descent parser for the small expression language
shared by operators, initial values and path points.

The parser only builds a tree of tuples; each consumer interprets it in
its own algebra (differential operators, constant balls, Gaussian
rationals)::

    ("num", Fraction) | ("name", str) | ("call", name, [args])
    ("add" | "sub" | "mul" | "div", a, b) | ("neg", a) | ("pow", a, int)

Decimal literals are read exactly: ``0.5`` is 1/2 and ``1e-40`` is
10^-40.
"""

from __future__ import annotations

import re
from fractions import Fraction

__all__ = ["ParseError", "parse", "tokenize"]


class ParseError(ValueError):
    def __init__(self, message, pos=None, text=None):
        self.pos = pos
        self.text = text
        where = f" at position {pos}" if pos is not None else ""
        super().__init__(f"{message}{where}")


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^(),;])
""", re.VERBOSE)


def tokenize(text):
    pos, out = 0, []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            val = m.group()
            if kind == "op" and val == "**":
                val = "^"
            out.append((kind, val, pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:

    def __init__(self, text):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, val):
        kind, v, pos = self.next()
        if v != val:
            raise ParseError(f"expected {val!r}, got {v or 'end of input'!r}",
                             pos, self.text)

    def parse(self):
        node = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {v!r}", pos, self.text)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.next()[1]
            rhs = self.term()
            node = ("add" if op == "+" else "sub", node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.next()[1]
            rhs = self.unary()
            node = ("mul" if op == "*" else "div", node, rhs)
        return node

    def unary(self):
        if self.peek()[1] == "-":
            self.next()
            return ("neg", self.unary())
        if self.peek()[1] == "+":
            self.next()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            self.next()
            sign = 1
            if self.peek()[1] == "-":
                self.next()
                sign = -1
            kind, v, pos = self.next()
            if kind == "num" and v.isdigit():
                exp = int(v)
            elif v == "(":
                inner = self.expr()
                self.expect(")")
                exp = _int_value(inner, pos, self.text)
            else:
                raise ParseError("exponent must be an integer", pos, self.text)
            return ("pow", base, sign * exp)
        return base

    def atom(self):
        kind, v, pos = self.next()
        if kind == "num":
            return ("num", Fraction(v))
        if kind == "name":
            if self.peek()[1] == "(":
                self.next()
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.next()
                    args.append(self.expr())
                self.expect(")")
                return ("call", v, args)
            return ("name", v)
        if v == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(f"unexpected {v or 'end of input'!r}", pos, self.text)


def _int_value(node, pos, text):
    if node[0] == "num" and node[1].denominator == 1:
        return int(node[1])
    if node[0] == "neg":
        return -_int_value(node[1], pos, text)
    raise ParseError("exponent must be an integer", pos, text)


def parse(text):
    """Parse ``text`` into an expression tree."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0, text)
    return _Parser(text).parse()
