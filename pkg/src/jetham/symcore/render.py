"""Plain-text and LaTeX rendering of expressions.

Output order is fixed by atom sort keys, never by interning order, so two
runs over the same input print byte-identical text.
"""

import re
from fractions import Fraction

from jetham.symcore.expr import Coordinate, FunctionApp, atom_of

GREEK = {
    name: "\\" + name
    for name in (
        "alpha beta gamma delta epsilon zeta eta theta iota kappa lambda mu nu xi "
        "pi rho sigma tau upsilon phi chi psi omega Gamma Delta Theta Lambda Xi Pi "
        "Sigma Upsilon Phi Psi Omega"
    ).split()
}

_TRAILING_DIGITS = re.compile(r"^([A-Za-z]+)(\d+)$")


def name_latex(name: str) -> str:
    """Best-effort LaTeX for a bare identifier: ``mu`` -> ``\\mu``, ``w0`` -> ``w_{0}``."""
    head, sep, tail = name.partition("_")
    m = _TRAILING_DIGITS.match(head)
    if m:
        head = f"{GREEK.get(m.group(1), m.group(1))}_{{{m.group(2)}}}"
    else:
        head = GREEK.get(head, head)
    if sep:
        return f"{head}_{{{tail}}}"
    return head


def _is_param(atom) -> bool:
    return isinstance(atom, Coordinate) and atom.role == "parameter"


def _ordered_terms(e):
    rows = []
    for mono, c in e._terms.items():
        factors = [(atom_of(mono[k]), mono[k + 1]) for k in range(0, len(mono), 2)]
        params = sorted(((a.sort_key, k), a) for a, k in factors if _is_param(a))
        others = sorted(((a.sort_key, k), a) for a, k in factors if not _is_param(a))
        degree = sum(k for (_, k), _ in others)
        key = (-degree, tuple(p for p, _ in others), tuple(p for p, _ in params))
        ordered = [(a, k) for (_, k), a in params] + [(a, k) for (_, k), a in others]
        rows.append((key, ordered, c))
    rows.sort(key=lambda r: r[0])
    return [(ordered, c) for _, ordered, c in rows]


def atom_text(atom) -> str:
    if isinstance(atom, Coordinate):
        return atom.name
    head = atom.name
    if any(atom.derivs):
        head += "^(" + ",".join(str(d) for d in atom.derivs) + ")"
    return head + "(" + ", ".join(expr_text(a) for a in atom.args) + ")"


def expr_text(e) -> str:
    if not e._terms:
        return "0"
    parts = []
    for ordered, c in _ordered_terms(e):
        factors = "*".join(
            atom_text(a) + (f"^{k}" if k > 1 else "") for a, k in ordered
        )
        mag = abs(c)
        if not factors:
            body = str(mag)
        elif mag == 1:
            body = factors
        else:
            body = f"{mag}*{factors}"
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append((" - " if c < 0 else " + ") + body)
    return "".join(parts)


def coordinate_latex(c: Coordinate) -> str:
    return c.latex or name_latex(c.name)


def _function_latex(atom: FunctionApp) -> str:
    fname = atom.latex_name or name_latex(atom.name)
    args = ", ".join(expr_latex(a) for a in atom.args)
    order = sum(atom.derivs)
    if not order:
        return f"{fname}({args})"
    denom = []
    for slot, k in enumerate(atom.derivs):
        if not k:
            continue
        arg = atom.args[slot]
        single = next(iter(arg.atoms())) if len(arg.atoms()) == 1 else None
        if isinstance(single, Coordinate) and arg == single:
            var = coordinate_latex(single)
        else:
            var = f"\\xi_{{{slot + 1}}}"
        denom.append(f"\\partial {var}" + (f"^{{{k}}}" if k > 1 else ""))
    num = "\\partial" + (f"^{{{order}}}" if order > 1 else "")
    return f"\\frac{{{num} {fname}}}{{{' '.join(denom)}}}({args})"


def atom_latex(atom) -> str:
    if isinstance(atom, Coordinate):
        return coordinate_latex(atom)
    return _function_latex(atom)


def _rational_latex(c) -> str:
    if isinstance(c, Fraction) and c.denominator != 1:
        return f"\\frac{{{c.numerator}}}{{{c.denominator}}}"
    return str(c)


def expr_latex(e) -> str:
    if not e._terms:
        return "0"
    parts = []
    for ordered, c in _ordered_terms(e):
        factors = " ".join(
            _power_latex(atom_latex(a), k, isinstance(a, FunctionApp)) for a, k in ordered
        )
        mag = abs(c)
        if not factors:
            body = _rational_latex(mag)
        elif mag == 1:
            body = factors
        else:
            body = f"{_rational_latex(mag)} {factors}"
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append((" - " if c < 0 else " + ") + body)
    return "".join(parts)


def _power_latex(base: str, k: int, wrap: bool) -> str:
    if k == 1:
        return base
    if wrap or ("_" in base and "^" in base):
        base = f"\\left({base}\\right)"
    elif "^" in base:
        base = f"{{{base}}}"
    return f"{base}^{{{k}}}"
