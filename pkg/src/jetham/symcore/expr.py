"""Canonical polynomial expressions over chart coordinates.

An :class:`Expr` is a sparse polynomial with exact rational coefficients whose
variables ("atoms") are :class:`Coordinate` objects or applications of formal
function symbols (:class:`FunctionApp`).  Atoms are interned into a process
wide table so a monomial is a flat tuple of integer ids and exponents; two
expressions are equal exactly when their term dictionaries are equal.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

from jetham import kernels
from jetham.errors import ArityError, CyclicBindingError, NonPolynomialError

ROLES = (
    "base",
    "theta-fiber",
    "y-fiber",
    "jet",
    "theta-jet",
    "momentum",
    "momentum-jet",
    "parameter",
)
ROLE_RANK = {role: rank for rank, role in enumerate(ROLES)}


class _Arith:
    """Arithmetic on atoms by promotion to :class:`Expr`."""

    __slots__ = ()

    def __add__(self, other):
        return as_expr(self) + other

    def __radd__(self, other):
        return other + as_expr(self)

    def __sub__(self, other):
        return as_expr(self) - other

    def __rsub__(self, other):
        return as_expr(other) - as_expr(self)

    def __mul__(self, other):
        return as_expr(self) * other

    def __rmul__(self, other):
        return as_expr(other) * as_expr(self)

    def __truediv__(self, other):
        return as_expr(self) / other

    def __neg__(self):
        return -as_expr(self)

    def __pos__(self):
        return as_expr(self)

    def __pow__(self, k):
        return as_expr(self) ** k


@dataclass(frozen=True)
class Coordinate(_Arith):
    """A chart coordinate (or declared parameter).

    ``indices`` packs the fiber index, the base multi-index (as counts) and
    the contravariant base index, in that order, as applicable to ``role``.
    """

    name: str
    role: str
    indices: tuple = ()
    latex: str = field(default="", compare=False, hash=False, repr=False)

    def __post_init__(self):
        if self.role not in ROLE_RANK:
            raise ValueError(f"unknown coordinate role {self.role!r}")
        if any((not isinstance(k, int)) or k < 0 for k in self.indices):
            raise ValueError(f"indices of {self.name!r} must be non-negative integers")
        if self.role == "momentum" and len(self.indices) != 2:
            raise ValueError("a momentum coordinate carries exactly (fiber, base) indices")

    @property
    def sort_key(self):
        return (0, ROLE_RANK[self.role], self.name, self.indices)

    @property
    def expr(self) -> "Expr":
        return as_expr(self)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class FunctionApp(_Arith):
    """A formal function symbol applied to argument expressions.

    ``derivs`` records how often the function has been differentiated in each
    argument slot, so mixed partials commute by construction.
    """

    name: str
    args: tuple
    derivs: tuple
    latex_name: str = field(default="", compare=False, hash=False, repr=False)

    def bump(self, slot: int) -> "FunctionApp":
        derivs = list(self.derivs)
        derivs[slot] += 1
        return FunctionApp(self.name, self.args, tuple(derivs), self.latex_name)

    @property
    def sort_key(self):
        return (1, self.name, self.derivs, tuple(a.sort_key() for a in self.args))

    def __str__(self):
        from jetham.symcore.render import atom_text

        return atom_text(self)


@dataclass(frozen=True)
class FunctionSymbol:
    """A declared-but-unspecified function of a fixed list of coordinates."""

    name: str
    arguments: tuple
    latex_name: str = field(default="", compare=False, hash=False, repr=False)

    def __call__(self, *args) -> "Expr":
        if len(args) != len(self.arguments):
            raise ArityError(
                f"{self.name} takes {len(self.arguments)} arguments, got {len(args)}"
            )
        app = FunctionApp(
            self.name,
            tuple(as_expr(a) for a in args),
            (0,) * len(args),
            self.latex_name,
        )
        return as_expr(app)

    @property
    def expr(self) -> "Expr":
        return self(*self.arguments)


# ---------------------------------------------------------------------------
# atom interning

_lock = threading.Lock()
_atom_ids: dict = {}
_atoms: list = []


def intern(atom) -> int:
    try:
        return _atom_ids[atom]
    except KeyError:
        pass
    with _lock:
        aid = _atom_ids.get(atom)
        if aid is None:
            aid = len(_atoms)
            _atoms.append(atom)
            _atom_ids[atom] = aid
        return aid


def atom_of(aid: int):
    return _atoms[aid]


# ---------------------------------------------------------------------------


def _to_rational(c):
    if isinstance(c, bool):
        raise TypeError("booleans are not expression constants")
    if isinstance(c, int):
        return c
    if isinstance(c, Fraction):
        return kernels.normalize(c)
    if isinstance(c, Rational):
        return kernels.normalize(Fraction(c.numerator, c.denominator))
    raise TypeError(f"not an exact rational constant: {c!r}")


def as_expr(value) -> "Expr":
    """Promote a constant, atom or expression to :class:`Expr`."""
    if isinstance(value, Expr):
        return value
    if isinstance(value, (Coordinate, FunctionApp)):
        return Expr._make({(intern(value), 1): 1})
    if isinstance(value, FunctionSymbol):
        return value.expr
    c = _to_rational(value)
    return Expr._make({(): c} if c else {})


def _mono_key(mono):
    return tuple(
        sorted((_atoms[mono[k]].sort_key, mono[k + 1]) for k in range(0, len(mono), 2))
    )


class Expr:
    """Immutable canonical polynomial.

    Use :func:`as_expr`, :func:`jetham.symcore.make_expr` or arithmetic on
    coordinates to build instances; the constructor builds zero.
    """

    __slots__ = ("_terms", "_hash", "_key", "_coords")

    def __init__(self):
        self._terms = {}
        self._hash = None
        self._key = None
        self._coords = None

    @classmethod
    def _make(cls, terms: dict) -> "Expr":
        e = object.__new__(cls)
        e._terms = terms
        e._hash = None
        e._key = None
        e._coords = None
        return e

    def __reduce__(self):
        flat = tuple(
            (tuple((_atoms[m[k]], m[k + 1]) for k in range(0, len(m), 2)), c)
            for m, c in self._terms.items()
        )
        return (_rebuild, (flat,))

    # -- inspection ---------------------------------------------------------

    def monomials(self):
        """Yield ``(((atom, exponent), ...), coefficient)`` pairs."""
        for m, c in self._terms.items():
            yield tuple((_atoms[m[k]], m[k + 1]) for k in range(0, len(m), 2)), c

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and () in self._terms)

    @property
    def constant(self):
        """The value of a constant expression."""
        if not self.is_constant:
            raise NonPolynomialError(f"{self} is not constant")
        return self._terms.get((), 0)

    def degree(self) -> int:
        if not self._terms:
            return 0
        return max(sum(m[1::2]) for m in self._terms)

    def atoms(self) -> frozenset:
        return frozenset(_atoms[m[k]] for m in self._terms for k in range(0, len(m), 2))

    def coordinates(self) -> frozenset:
        """Every coordinate mentioned, including inside function arguments."""
        if self._coords is None:
            found = set()
            for a in self.atoms():
                if isinstance(a, Coordinate):
                    found.add(a)
                else:
                    for arg in a.args:
                        found |= arg.coordinates()
            self._coords = frozenset(found)
        return self._coords

    def sort_key(self):
        if self._key is None:
            self._key = tuple(sorted((_mono_key(m), c) for m, c in self._terms.items()))
        return self._key

    # -- comparison ---------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, Expr):
            return self._terms == other._terms
        try:
            other = as_expr(other)
        except TypeError:
            return NotImplemented
        return self._terms == other._terms

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __hash__(self):
        if self._hash is None:
            if self.is_constant:
                self._hash = hash(self._terms.get((), 0))
            else:
                self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        try:
            other = as_expr(other)
        except TypeError:
            return NotImplemented
        return Expr._make(kernels.poly_add(self._terms, other._terms))

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = as_expr(other)
        except TypeError:
            return NotImplemented
        return Expr._make(kernels.poly_add(self._terms, other._terms, -1))

    def __rsub__(self, other):
        try:
            other = as_expr(other)
        except TypeError:
            return NotImplemented
        return other - self

    def __neg__(self):
        return Expr._make(kernels.poly_scale(self._terms, -1))

    def __pos__(self):
        return self

    def __mul__(self, other):
        try:
            other = as_expr(other)
        except TypeError:
            return NotImplemented
        if other.is_constant:
            return Expr._make(kernels.poly_scale(self._terms, other._terms.get((), 0)))
        if self.is_constant:
            return Expr._make(kernels.poly_scale(other._terms, self._terms.get((), 0)))
        return Expr._make(kernels.poly_mul(self._terms, other._terms, kernels.max_terms()))

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            other = as_expr(other)
        except TypeError:
            return NotImplemented
        if not other.is_constant:
            raise NonPolynomialError(f"division by non-constant {other}")
        c = other.constant
        if not c:
            raise ZeroDivisionError("division of an expression by zero")
        return Expr._make(kernels.poly_scale(self._terms, Fraction(1) / c))

    def __pow__(self, k):
        if isinstance(k, Expr) and k.is_constant:
            k = k.constant
        if not isinstance(k, int) or isinstance(k, bool) or k < 0:
            raise NonPolynomialError(f"exponent must be a non-negative integer, got {k!r}")
        if k == 0:
            return ONE
        if len(self._terms) == 1:
            ((m, c),) = self._terms.items()
            mono = tuple(v * k if i % 2 else v for i, v in enumerate(m))
            return Expr._make({mono: kernels.normalize(Fraction(c) ** k)})
        result = ONE
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # -- calculus -----------------------------------------------------------

    def diff(self, c: Coordinate) -> "Expr":
        """Exact partial derivative; distinct coordinates are independent."""
        if c not in self.coordinates():
            return ZERO
        cap = kernels.max_terms()
        out = {}
        for mono, coeff in self._terms.items():
            for k in range(0, len(mono), 2):
                d = _atom_diff(mono[k], c)
                if not d._terms:
                    continue
                e = mono[k + 1]
                if e == 1:
                    rest = mono[:k] + mono[k + 2 :]
                else:
                    rest = mono[: k + 1] + (e - 1,) + mono[k + 2 :]
                kernels.poly_iadd(out, kernels.poly_mul({rest: coeff * e}, d._terms, cap))
        return Expr._make(out)

    def subst(self, bindings) -> "Expr":
        """Simultaneous substitution of coordinates by expressions."""
        b = _check_bindings(bindings)
        if not b or not (self.coordinates() & b.keys()):
            return self
        return _subst(self, b, {})

    def monic(self) -> "Expr":
        """Scale so the leading term (smallest monomial key) has coefficient 1."""
        if not self._terms:
            return self
        lead = min(self._terms, key=_mono_key)
        c = self._terms[lead]
        if c == 1:
            return self
        return Expr._make(kernels.poly_scale(self._terms, Fraction(1) / c))

    def __str__(self):
        from jetham.symcore.render import expr_text

        return expr_text(self)

    def __repr__(self):
        return f"Expr({str(self)!r})"


def _rebuild(flat):
    out = {}
    for factors, c in flat:
        e = as_expr(c)
        for atom, k in factors:
            e = e * as_expr(atom) ** k
        kernels.poly_iadd(out, e._terms)
    return Expr._make(out)


ZERO = Expr._make({})
ONE = Expr._make({(): 1})

_diff_cache: dict = {}


def _atom_diff(aid: int, c: Coordinate) -> Expr:
    key = (aid, c)
    hit = _diff_cache.get(key)
    if hit is not None:
        return hit
    atom = _atoms[aid]
    if isinstance(atom, Coordinate):
        d = ONE if atom == c else ZERO
    else:
        d = ZERO
        for slot, arg in enumerate(atom.args):
            da = arg.diff(c)
            if da._terms:
                d = d + as_expr(atom.bump(slot)) * da
    _diff_cache[key] = d
    return d


def _check_bindings(bindings) -> dict:
    b = {}
    for target, value in dict(bindings).items():
        if not isinstance(target, Coordinate):
            raise TypeError(f"substitution target must be a Coordinate, got {target!r}")
        b[target] = as_expr(value)
    targets = b.keys()
    for target, value in b.items():
        bad = value.coordinates() & targets
        if bad:
            names = ", ".join(sorted(c.name for c in bad))
            raise CyclicBindingError(
                f"replacement for {target.name} mentions substituted coordinate(s) {names}"
            )
    return b


def _subst(e: Expr, b: dict, cache: dict) -> Expr:
    cap = kernels.max_terms()
    targets = b.keys()
    out = {}
    for mono, coeff in e._terms.items():
        acc = {(): coeff}
        kept = []
        for k in range(0, len(mono), 2):
            aid = mono[k]
            if aid in cache:
                r = cache[aid]
            else:
                atom = _atoms[aid]
                if isinstance(atom, Coordinate):
                    r = b.get(atom)
                elif any(arg.coordinates() & targets for arg in atom.args):
                    args = tuple(
                        _subst(arg, b, cache) if arg.coordinates() & targets else arg
                        for arg in atom.args
                    )
                    r = as_expr(FunctionApp(atom.name, args, atom.derivs, atom.latex_name))
                else:
                    r = None
                cache[aid] = r
            if r is None:
                kept.append(aid)
                kept.append(mono[k + 1])
            else:
                acc = kernels.poly_mul(acc, (r ** mono[k + 1])._terms, cap)
        if kept:
            acc = kernels.poly_mul(acc, {tuple(kept): 1}, cap)
        kernels.poly_iadd(out, acc)
    return Expr._make(out)
