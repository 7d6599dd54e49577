"""Exterior algebra over :mod:`jetham.symcore`.

A :class:`Form` maps strictly sorted wedge words of coordinates to nonzero
coefficient expressions.  A :class:`ValuedForm` is a finite sum of forms
tensored with formal value legs: an optional base-tangent leg ``∂_λ`` (the
"TX-leg", stored as its 1-based index) and an optional ``∂_τ`` leg (the
"VΘ-leg").
"""

from __future__ import annotations

from jetham.errors import DerivationError, FormDegreeError
from jetham.symcore.expr import Coordinate, Expr, as_expr
from jetham.symcore.render import coordinate_latex, expr_latex, expr_text


def _key(c: Coordinate):
    return c.sort_key


def _sort_word(word):
    """Sort a word of coordinates; return (sign, sorted word) or (0, None) on repeats."""
    items = list(word)
    sign = 1
    # insertion sort keeps the parity bookkeeping obvious
    for i in range(1, len(items)):
        j = i
        while j > 0 and _key(items[j - 1]) > _key(items[j]):
            items[j - 1], items[j] = items[j], items[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(items, items[1:]):
        if a == b:
            return 0, None
    return sign, tuple(items)


class Form:
    """A differential k-form ``Σ coeff · dc1∧…∧dck`` on a single chart."""

    __slots__ = ("degree", "_terms")

    def __init__(self, terms=None, degree=None):
        acc = {}
        deg = degree
        for word, coeff in (terms or {}).items():
            word = tuple(word)
            if deg is None:
                deg = len(word)
            elif len(word) != deg:
                raise FormDegreeError("all words of a form must have the same degree")
            coeff = as_expr(coeff)
            if coeff.is_zero:
                continue
            sign, sorted_word = _sort_word(word)
            if not sign:
                continue
            prev = acc.get(sorted_word)
            value = coeff if sign > 0 else -coeff
            acc[sorted_word] = value if prev is None else prev + value
        self._terms = {w: c for w, c in acc.items() if not c.is_zero}
        self.degree = 0 if deg is None else deg

    @classmethod
    def _raw(cls, terms, degree):
        f = object.__new__(cls)
        f._terms = terms
        f.degree = degree
        return f

    @classmethod
    def scalar(cls, e) -> "Form":
        e = as_expr(e)
        return cls._raw({} if e.is_zero else {(): e}, 0)

    @classmethod
    def d(cls, *coords: Coordinate) -> "Form":
        """The basis form ``dc1∧…∧dck`` (sign-normalized)."""
        return cls({tuple(coords): 1}, len(coords))

    @classmethod
    def zero(cls, degree: int) -> "Form":
        return cls._raw({}, degree)

    # -- inspection ---------------------------------------------------------

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, *coords: Coordinate) -> Expr:
        sign, word = _sort_word(coords)
        if not sign:
            return as_expr(0)
        c = self._terms.get(word, as_expr(0))
        return c if sign > 0 else -c

    def as_expr(self) -> Expr:
        if self.degree:
            raise FormDegreeError(f"a {self.degree}-form is not a scalar")
        return self._terms.get((), as_expr(0))

    def coordinates(self) -> frozenset:
        found = set()
        for word, c in self._terms.items():
            found.update(word)
            found |= c.coordinates()
        return frozenset(found)

    # -- algebra ------------------------------------------------------------

    def _check(self, other):
        if isinstance(other, Form):
            return other
        return Form.scalar(other)

    def __add__(self, other):
        other = self._check(other)
        if other.is_zero:
            return self
        if self.is_zero:
            return other
        if other.degree != self.degree:
            raise FormDegreeError(f"cannot add a {self.degree}-form and a {other.degree}-form")
        acc = dict(self._terms)
        for w, c in other._terms.items():
            s = acc[w] + c if w in acc else c
            if s.is_zero:
                acc.pop(w, None)
            else:
                acc[w] = s
        return Form._raw(acc, self.degree)

    __radd__ = __add__

    def __neg__(self):
        return Form._raw({w: -c for w, c in self._terms.items()}, self.degree)

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, scalar):
        if isinstance(scalar, Form):
            return wedge(self, scalar)
        s = as_expr(scalar)
        if s.is_zero:
            return Form.zero(self.degree)
        out = {}
        for w, c in self._terms.items():
            v = c * s
            if not v.is_zero:
                out[w] = v
        return Form._raw(out, self.degree)

    def __rmul__(self, scalar):
        return self * scalar

    def __xor__(self, other):
        return wedge(self, other)

    def __eq__(self, other):
        if isinstance(other, Form):
            if self.is_zero and other.is_zero:
                return True
            return self.degree == other.degree and self._terms == other._terms
        if isinstance(other, int) and other == 0:
            return self.is_zero
        return NotImplemented

    def __hash__(self):
        return hash((self.degree, frozenset(self._terms.items())))

    def map_coefficients(self, fn) -> "Form":
        return Form({w: fn(c) for w, c in self._terms.items()}, self.degree)

    def subst(self, bindings) -> "Form":
        """Substitute into coefficients only; differentials are left alone."""
        return self.map_coefficients(lambda c: c.subst(bindings))

    def __str__(self):
        return form_text(self)

    def __repr__(self):
        return f"Form({form_text(self)!r})"


def as_form(a) -> Form:
    return a if isinstance(a, Form) else Form.scalar(a)


def wedge(a, b) -> Form:
    """Exterior product; the result is sign-normalized."""
    a = as_form(a)
    b = as_form(b)
    out = {}
    for wa, ca in a._terms.items():
        for wb, cb in b._terms.items():
            sign, word = _sort_word(wa + wb)
            if not sign:
                continue
            v = ca * cb
            if sign < 0:
                v = -v
            prev = out.get(word)
            out[word] = v if prev is None else prev + v
    return Form._raw({w: c for w, c in out.items() if not c.is_zero}, a.degree + b.degree)


def _differentiable(c: Coordinate) -> bool:
    return c.role != "parameter"


def ext_d(a) -> Form:
    """Exterior derivative; declared parameters are constants."""
    a = as_form(a)
    out = Form.zero(a.degree + 1)
    for word, coeff in a._terms.items():
        for c in sorted(coeff.coordinates(), key=_key):
            if not _differentiable(c) or c in word:
                continue
            dc = coeff.diff(c)
            if dc.is_zero:
                continue
            out = out + Form({(c,) + word: dc}, a.degree + 1)
    return out


class VectorField:
    """Finite-support vector field ``Σ comp[c] ∂_c``."""

    __slots__ = ("components",)

    def __init__(self, components=None):
        comps = {}
        for c, v in (components or {}).items():
            if not isinstance(c, Coordinate):
                raise TypeError(f"vector field keys must be coordinates, got {c!r}")
            v = as_expr(v)
            if not v.is_zero:
                comps[c] = v
        self.components = comps

    @classmethod
    def partial(cls, c: Coordinate) -> "VectorField":
        return cls({c: 1})

    def __add__(self, other):
        comps = dict(self.components)
        for c, v in other.components.items():
            comps[c] = comps[c] + v if c in comps else v
        return VectorField(comps)

    def __getitem__(self, c):
        return self.components.get(c, as_expr(0))

    def __eq__(self, other):
        return isinstance(other, VectorField) and self.components == other.components

    def __repr__(self):
        inner = " + ".join(f"({v})∂_{c.name}" for c, v in sorted(
            self.components.items(), key=lambda kv: _key(kv[0])))
        return f"VectorField({inner or '0'})"


def interior(v: VectorField, a) -> Form:
    """Interior product ``v ⌋ a``; contracting a 0-form is an error."""
    a = as_form(a)
    if a.degree == 0:
        raise FormDegreeError("cannot contract a vector field into a 0-form")
    out = {}
    for word, coeff in a._terms.items():
        for k, c in enumerate(word):
            comp = v.components.get(c)
            if comp is None:
                continue
            val = coeff * comp
            if k % 2:
                val = -val
            rest = word[:k] + word[k + 1 :]
            prev = out.get(rest)
            out[rest] = val if prev is None else prev + val
    return Form._raw({w: c for w, c in out.items() if not c.is_zero}, a.degree - 1)


def volume_form(base) -> Form:
    """``ω = dx^1∧…∧dx^n`` in the given base-coordinate order."""
    return Form.d(*base)


def volume_contraction(base, lam: int) -> Form:
    """``ω_λ = ∂_λ ⌋ ω`` for 1-based ``lam``."""
    return interior(VectorField.partial(base[lam - 1]), volume_form(base))


# ---------------------------------------------------------------------------
# valued forms

TX = "tx"
THETA = "theta"


class ValuedForm:
    """Sum of forms tensored with formal legs.

    Keys are ``(lam, theta)`` where ``lam`` is ``None`` or the 1-based index of
    the base-tangent leg ``∂_λ`` and ``theta`` flags the ``∂_τ`` leg.
    ``base`` lists the base coordinates the TX-leg indices refer to.
    """

    __slots__ = ("base", "components")

    def __init__(self, base, components=None):
        self.base = tuple(base)
        comps = {}
        for (lam, theta), form in (components or {}).items():
            if lam is not None and not 1 <= lam <= len(self.base):
                raise ValueError(f"TX-leg index {lam} outside 1..{len(self.base)}")
            form = as_form(form)
            key = (lam, bool(theta))
            if key in comps:
                form = comps[key] + form
            if form.is_zero:
                comps.pop(key, None)
            else:
                comps[key] = form
        self.components = comps

    @property
    def legs(self) -> frozenset:
        found = set()
        for lam, theta in self.components:
            if lam is not None:
                found.add(TX)
            if theta:
                found.add(THETA)
        return frozenset(found)

    @property
    def is_zero(self) -> bool:
        return not self.components

    def component(self, lam=None, theta=False) -> Form:
        return self.components.get((lam, bool(theta)), Form.zero(0))

    def map(self, fn) -> "ValuedForm":
        return ValuedForm(self.base, {k: fn(f) for k, f in self.components.items()})

    def __add__(self, other):
        if self.base != other.base:
            raise DerivationError("valued forms over different bases")
        merged = dict(self.components)
        for k, f in other.components.items():
            merged[k] = merged[k] + f if k in merged else f
        return ValuedForm(self.base, merged)

    def __neg__(self):
        return self.map(lambda f: -f)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, ValuedForm):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(frozenset(self.components.items()))

    def subst(self, bindings) -> "ValuedForm":
        return self.map(lambda f: f.subst(bindings))

    def __str__(self):
        return valued_text(self)

    def __repr__(self):
        return f"ValuedForm({valued_text(self)!r})"


def valued_ext_d(vf: ValuedForm) -> ValuedForm:
    """Exterior derivative with the legs carried along as constants."""
    return vf.map(ext_d)


def _theta_admissible(c: Coordinate) -> bool:
    return c.role in ("base", "theta-fiber", "parameter")


def split_theta_form(psi, base):
    """Components ``(ψ_μ by 1-based index, ψ_τ)`` of a 1-form on Θ."""
    psi = as_form(psi)
    if psi.is_zero:
        return {}, as_expr(0)
    if psi.degree != 1:
        raise FormDegreeError(f"leg contraction needs a 1-form, got degree {psi.degree}")
    index = {c: k + 1 for k, c in enumerate(base)}
    along = {}
    along_tau = as_expr(0)
    for (c,), coeff in psi._terms.items():
        bad = [x.name for x in coeff.coordinates() if not _theta_admissible(x)]
        if bad or not (c in index or c.role == "theta-fiber"):
            names = ", ".join(sorted(bad)) or c.name
            raise DerivationError(f"1-form is not on Θ: mentions {names}")
        if c in index:
            along[index[c]] = coeff
        else:
            along_tau = coeff
    return along, along_tau


def leg_contract(vf: ValuedForm, psi) -> ValuedForm:
    """Pair a 1-form ``ψ = ψ_μ dx^μ + ψ_τ dτ`` on Θ against the value legs.

    Each term gives up one leg: ``ψ_λ`` eats the TX-leg ``∂_λ``, ``ψ_τ`` eats
    the ``∂_τ`` leg.  Terms with both legs contribute to both results.
    """
    along, along_tau = split_theta_form(psi, vf.base)
    out = {}

    def put(key, form):
        out[key] = out[key] + form if key in out else form

    for (lam, theta), form in vf.components.items():
        if lam is not None and lam in along:
            put((None, theta), form * along[lam])
        if theta and not along_tau.is_zero:
            put((lam, False), form * along_tau)
    return ValuedForm(vf.base, out)


def absorb_tx_leg(vf: ValuedForm) -> ValuedForm:
    """Trade ``G∧ω ⊗ ∂_λ`` for ``G∧ω_λ`` on every TX-leg component."""
    base = vf.base
    omega = volume_form(base)
    base_set = set(base)
    out = {}
    for (lam, theta), form in vf.components.items():
        if lam is None:
            key = (None, theta)
            out[key] = out[key] + form if key in out else form
            continue
        omega_lam = volume_contraction(base, lam)
        acc = Form.zero(form.degree - 1)
        for word, coeff in form._terms.items():
            if not base_set <= set(word):
                raise DerivationError("TX-leg component is not of the form G∧ω")
            rest = tuple(c for c in word if c not in base_set)
            probe = wedge(Form.d(*rest), omega)
            sign = probe.coefficient(*word)
            acc = acc + wedge(Form.d(*rest), omega_lam) * (coeff * sign)
        key = (None, theta)
        out[key] = out[key] + acc if key in out else acc
    return ValuedForm(base, out)


# ---------------------------------------------------------------------------
# rendering


def _word_text(word):
    return "∧".join(f"d{c.name}" for c in word)


def _word_latex(word):
    return " \\wedge ".join(f"d {coordinate_latex(c)}" for c in word)


def _sorted_terms(form):
    return sorted(form._terms.items(), key=lambda kv: tuple(_key(c) for c in kv[0]))


def form_text(form: Form) -> str:
    if form.is_zero:
        return "0"
    parts = []
    for word, coeff in _sorted_terms(form):
        if not word:
            parts.append(f"({expr_text(coeff)})")
        elif coeff == 1:
            parts.append(_word_text(word))
        else:
            parts.append(f"({expr_text(coeff)}) {_word_text(word)}")
    return " + ".join(parts)


def form_latex(form: Form) -> str:
    if form.is_zero:
        return "0"
    parts = []
    for word, coeff in _sorted_terms(form):
        if not word:
            parts.append(f"\\left({expr_latex(coeff)}\\right)")
        elif coeff == 1:
            parts.append(_word_latex(word))
        else:
            parts.append(f"\\left({expr_latex(coeff)}\\right) {_word_latex(word)}")
    return " + ".join(parts)


def _leg_suffix(vf, lam, theta, latex):
    legs = []
    if lam is not None:
        c = vf.base[lam - 1]
        legs.append(f"\\partial_{{{coordinate_latex(c)}}}" if latex else f"∂_{c.name}")
    if theta:
        legs.append("\\partial_{\\tau}" if latex else "∂_tau")
    if not legs:
        return ""
    sep = " \\otimes " if latex else " ⊗ "
    return sep + sep.join(legs)


def _leg_order(item):
    (lam, theta), _ = item
    return (lam is not None, lam or 0, theta)


def valued_text(vf: ValuedForm) -> str:
    if vf.is_zero:
        return "0"
    return " + ".join(
        f"[{form_text(f)}]{_leg_suffix(vf, lam, theta, False)}"
        for (lam, theta), f in sorted(vf.components.items(), key=_leg_order)
    )


def valued_latex(vf: ValuedForm) -> str:
    if vf.is_zero:
        return "0"
    return " + ".join(
        f"\\left[{form_latex(f)}\\right]{_leg_suffix(vf, lam, theta, True)}"
        for (lam, theta), f in sorted(vf.components.items(), key=_leg_order)
    )
