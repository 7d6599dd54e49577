"""Recursive-descent reader for the polynomial expression language.

Grammar (``^`` and ``**`` both mean power)::

    sum     := product (("+" | "-") product)*
    product := unary (("*" | "/") unary)*
    unary   := ("+" | "-") unary | power
    power   := primary (("^" | "**") unary)?
    primary := NUMBER | NAME | NAME "(" sum ("," sum)* ")" | "(" sum ")"

Names resolve through a scope mapping to :class:`Coordinate` or
:class:`FunctionSymbol`.  Division is only allowed by nonzero constants.
"""

import re
from fractions import Fraction

from jetham.errors import ArityError, ParseError, UnknownNameError
from jetham.symcore.expr import Coordinate, Expr, FunctionSymbol, as_expr

NAME_PATTERN = r"[A-Za-z][A-Za-z0-9]*(?:\[\s*\d+(?:\s*,\s*\d+)*\s*\])?(?:_[A-Za-z0-9]+)*"

_TOKEN = re.compile(
    rf"""
    (?P<ws>[ \t]+)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<name>{NAME_PATTERN})
  | (?P<op>\*\*|[-+*/^(),]|−)
    """,
    re.VERBOSE,
)


def _canonical_name(raw: str) -> str:
    return re.sub(r"\s+", "", raw)


def tokenize(text, line=1, column=1):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(
                f"unexpected character {text[pos]!r}",
                line,
                column + pos,
                "expressions use numbers, names, + - * / ^ and parentheses",
            )
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if kind == "op" and value == "−":
                value = "-"
            if kind == "name":
                value = _canonical_name(value)
            tokens.append((kind, value, column + pos))
        pos = m.end()
    tokens.append(("end", "", column + len(text)))
    return tokens


class _Reader:
    def __init__(self, text, scope, line, column):
        self.tokens = tokenize(text, line, column)
        self.scope = scope
        self.line = line
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, col, hint="", cls=ParseError):
        return cls(message, self.line, col, hint)

    def expect(self, value):
        kind, got, col = self.take()
        if got != value or kind == "end":
            shown = got if kind != "end" else "end of expression"
            raise self.error(f"expected {value!r}, found {shown!r}", col)

    def parse(self):
        e = self.sum()
        kind, value, col = self.peek()
        if kind != "end":
            raise self.error(f"unexpected {value!r}", col, "check for a missing operator")
        return e

    def sum(self):
        e = self.product()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, _ = self.take()
            rhs = self.product()
            e = e + rhs if op == "+" else e - rhs
        return e

    def product(self):
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, col = self.take()
            rhs = self.unary()
            if op == "*":
                e = e * rhs
            else:
                if not rhs.is_constant:
                    raise self.error(
                        "division by a non-constant expression",
                        col,
                        "only division by numbers is allowed; multiply instead",
                    )
                if rhs.is_zero:
                    raise self.error("division by zero", col)
                e = e / rhs
        return e

    def unary(self):
        kind, value, _ = self.peek()
        if kind == "op" and value in ("+", "-"):
            self.take()
            inner = self.unary()
            return -inner if value == "-" else inner
        return self.power()

    def power(self):
        base = self.primary()
        kind, value, col = self.peek()
        if kind == "op" and value in ("^", "**"):
            self.take()
            exponent = self.unary()
            if not exponent.is_constant:
                raise self.error("exponent must be a number", col)
            k = exponent.constant
            if not isinstance(k, int) or k < 0:
                raise self.error(
                    f"exponent must be a non-negative integer, got {k}",
                    col,
                    "the expression language is polynomial",
                )
            return base**k
        return base

    def primary(self):
        kind, value, col = self.take()
        if kind == "num":
            return as_expr(Fraction(value))
        if kind == "op" and value == "(":
            e = self.sum()
            self.expect(")")
            return e
        if kind == "name":
            target = self.scope.get(value)
            if target is None:
                raise self.error(
                    f"unknown name {value!r}",
                    col,
                    "declare it as a parameter or function, or use a chart coordinate",
                    UnknownNameError,
                )
            called = self.peek()[1] == "(" and self.peek()[0] == "op"
            if isinstance(target, FunctionSymbol):
                if not called:
                    return target.expr
                self.take()
                args = [self.sum()]
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.sum())
                self.expect(")")
                if len(args) != len(target.arguments):
                    raise self.error(
                        f"{value} takes {len(target.arguments)} argument(s), got {len(args)}",
                        col,
                        f"declared as {value}({', '.join(a.name for a in target.arguments)})",
                        ArityError,
                    )
                return target(*args)
            if called:
                raise self.error(f"{value!r} is a coordinate, not a function", col)
            return as_expr(target)
        if kind == "end":
            raise self.error("unexpected end of expression", col)
        raise self.error(f"unexpected {value!r}", col)


def parse_expr(text: str, scope=None, *, line: int = 1, column: int = 1) -> Expr:
    """Parse ``text`` into a canonical :class:`Expr`."""
    return _Reader(text, scope or {}, line, column).parse()


def make_expr(source, scope=None) -> Expr:
    """Canonical expression from text, a constant, an atom or an expression."""
    if isinstance(source, str):
        return parse_expr(source, scope)
    if isinstance(source, Coordinate):
        if scope is not None and scope.get(source.name) != source:
            raise UnknownNameError(f"coordinate {source.name!r} is not in scope")
        return as_expr(source)
    return as_expr(source)
