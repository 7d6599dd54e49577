"""Canonical symbolic expressions: atoms, arithmetic, diff, subst, parsing."""

from jetham.symcore.expr import (
    ONE,
    ROLE_RANK,
    ROLES,
    ZERO,
    Coordinate,
    Expr,
    FunctionApp,
    FunctionSymbol,
    as_expr,
)
from jetham.symcore.parse import make_expr, parse_expr
from jetham.symcore.render import expr_latex, expr_text


def diff(e, c):
    """Partial derivative of ``e`` with respect to coordinate ``c``."""
    return as_expr(e).diff(c)


def subst(e, bindings):
    """Simultaneous substitution ``e[c := bindings[c]]``."""
    return as_expr(e).subst(bindings)


__all__ = [
    "ONE",
    "ROLES",
    "ROLE_RANK",
    "ZERO",
    "Coordinate",
    "Expr",
    "FunctionApp",
    "FunctionSymbol",
    "as_expr",
    "diff",
    "expr_latex",
    "expr_text",
    "make_expr",
    "parse_expr",
    "subst",
]
