"""Composite-bundle charts, jet prolongation and connections.

A :class:`Chart` describes ``Y → Θ → X`` over a single coordinate patch:
base coordinates ``x^λ``, the line-bundle coordinate ``τ``, fiber
coordinates ``y^i`` and optionally the momenta ``p^λ_i`` of the extended
Legendre bundle.  Each of ``τ``, ``y^i`` and ``p^λ_i`` is a *field* with jet
coordinates up to its own order; ``prolong`` raises the order of the
``y`` fields.  Jets are symmetric and keyed by multi-index counts.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property
from math import comb

from jetham.errors import (
    ConnectionMismatchError,
    DerivationError,
    FormDegreeError,
    JetOrderError,
    SectionError,
)
from jetham.excalc import Form, as_form, wedge
from jetham.symcore.expr import Coordinate, Expr, FunctionSymbol, as_expr
from jetham.symcore.render import name_latex

FIELD_ROLES = {"theta-fiber": "theta-jet", "y-fiber": "jet", "momentum": "momentum-jet"}
_DIGITS = re.compile(r"^([A-Za-z]+)(\d+)$")


def multi_indices(n: int, k: int):
    """All multi-indices (as count tuples of length ``n``) with ``|α| = k``."""
    out = []
    for combo in itertools.combinations_with_replacement(range(n), k):
        counts = [0] * n
        for lam in combo:
            counts[lam] += 1
        out.append(tuple(counts))
    return out


def unit(n: int, lam: int):
    """Multi-index of the single 1-based base direction ``lam``."""
    counts = [0] * n
    counts[lam - 1] = 1
    return tuple(counts)


def add_index(alpha, lam: int):
    counts = list(alpha)
    counts[lam - 1] += 1
    return tuple(counts)


@dataclass(frozen=True)
class Chart:
    """Immutable coordinate inventory of a composite bundle and its jets."""

    base_names: tuple
    fiber_names: tuple
    order: int = 1
    theta_name: str | None = "tau"
    momentum_prefix: str | None = None
    theta_order: int = 1
    momentum_order: int = 1
    parameter_names: tuple = ()
    functions: tuple = field(default=(), compare=False)

    @classmethod
    def build(
        cls,
        n: int,
        m: int,
        order: int = 1,
        *,
        base=None,
        fibers=None,
        theta="tau",
        momenta=False,
        momentum="p",
        parameters=(),
        theta_order=1,
        momentum_order=1,
    ) -> "Chart":
        if base is None:
            base = ("x",) if n == 1 else tuple(f"x{k}" for k in range(1, n + 1))
        if fibers is None:
            fibers = ("y",) if m == 1 else tuple(f"y{k}" for k in range(1, m + 1))
        if len(base) != n or len(fibers) != m:
            raise ValueError("coordinate name lists do not match n and m")
        return cls(
            tuple(base),
            tuple(fibers),
            order,
            theta,
            momentum if momenta else None,
            theta_order,
            momentum_order,
            tuple(parameters),
        )

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a chart needs at least one base coordinate")
        if min(self.order, self.theta_order, self.momentum_order) < 0:
            raise ValueError("jet orders must be non-negative")
        names = [c.name for c in self.coordinates] + [f.name for f in self.functions]
        seen = set()
        for name in names:
            if name in seen:
                raise ValueError(f"duplicate coordinate name {name!r}")
            seen.add(name)

    # -- sizes ----------------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.base_names)

    @property
    def m(self) -> int:
        return len(self.fiber_names)

    @property
    def has_theta(self) -> bool:
        return self.theta_name is not None

    @property
    def has_momenta(self) -> bool:
        return self.momentum_prefix is not None

    # -- inventory ------------------------------------------------------------

    @cached_property
    def _labels(self):
        if all(len(nm) == 1 for nm in self.base_names):
            return tuple(self.base_names)
        return tuple(str(k) for k in range(1, self.n + 1))

    def _suffix(self, alpha) -> str:
        return "".join(self._labels[lam] * cnt for lam, cnt in enumerate(alpha))

    @cached_property
    def base(self) -> tuple:
        out = []
        for lam, nm in enumerate(self.base_names, start=1):
            d = _DIGITS.match(nm)
            latex = f"{name_latex(d.group(1))}^{{{d.group(2)}}}" if d else name_latex(nm)
            out.append(Coordinate(nm, "base", (lam,), latex))
        return tuple(out)

    @cached_property
    def tau(self):
        if not self.has_theta:
            return None
        return Coordinate(self.theta_name, "theta-fiber", (), name_latex(self.theta_name))

    @cached_property
    def fibers(self) -> tuple:
        out = []
        for i, nm in enumerate(self.fiber_names, start=1):
            d = _DIGITS.match(nm)
            latex = f"{name_latex(d.group(1))}^{{{d.group(2)}}}" if d else name_latex(nm)
            out.append(Coordinate(nm, "y-fiber", (i,), latex))
        return tuple(out)

    def _momentum_name(self, lam, i):
        pre = self.momentum_prefix
        if self.n == 1 and self.m == 1:
            return pre, name_latex(pre)
        if self.m == 1:
            return f"{pre}[{lam}]", f"{name_latex(pre)}^{{{lam}}}"
        return f"{pre}[{lam},{i}]", f"{name_latex(pre)}^{{{lam}}}_{{{i}}}"

    @cached_property
    def momenta(self) -> dict:
        """``{(λ, i): p^λ_i}`` with 1-based indices; empty without momenta."""
        if not self.has_momenta:
            return {}
        out = {}
        for i in range(1, self.m + 1):
            for lam in range(1, self.n + 1):
                name, latex = self._momentum_name(lam, i)
                out[(lam, i)] = Coordinate(name, "momentum", (i, lam), latex)
        return out

    @cached_property
    def fields(self) -> tuple:
        out = []
        if self.tau is not None:
            out.append(self.tau)
        out.extend(self.fibers)
        out.extend(self.momenta.values())
        return tuple(out)

    def field_order(self, fld: Coordinate) -> int:
        if fld.role == "theta-fiber":
            return self.theta_order
        if fld.role == "y-fiber":
            return self.order
        if fld.role == "momentum":
            return self.momentum_order
        raise DerivationError(f"{fld.name} is not a field coordinate")

    def _make_jet(self, fld: Coordinate, alpha) -> Coordinate:
        suffix = self._suffix(alpha)
        latex_head = fld.latex or name_latex(fld.name)
        if fld.role == "momentum":
            lam, i = fld.indices[1], fld.indices[0]
            pre = name_latex(self.momentum_prefix)
            if self.n == 1 and self.m == 1:
                latex = f"{pre}_{{{suffix}}}"
            elif self.m == 1:
                latex = f"{pre}^{{{lam}}}_{{,{suffix}}}"
            else:
                latex = f"{pre}^{{{lam}}}_{{{i},{suffix}}}"
        else:
            latex = f"{latex_head}_{{{suffix}}}"
        role = FIELD_ROLES[fld.role]
        return Coordinate(f"{fld.name}_{suffix}", role, fld.indices + tuple(alpha), latex)

    @cached_property
    def _jet_tables(self):
        forward = {}
        backward = {}
        for fld in self.fields:
            zero = (0,) * self.n
            forward[(fld, zero)] = fld
            backward[fld] = (fld, zero)
            for k in range(1, self.field_order(fld) + 1):
                for alpha in multi_indices(self.n, k):
                    c = self._make_jet(fld, alpha)
                    forward[(fld, alpha)] = c
                    backward[c] = (fld, alpha)
        return forward, backward

    def jet(self, fld: Coordinate, alpha) -> Coordinate:
        """The jet coordinate ``fld_α``; raises :class:`JetOrderError` past the order."""
        alpha = tuple(alpha)
        if len(alpha) != self.n:
            raise ValueError(f"multi-index {alpha} must have length {self.n}")
        hit = self._jet_tables[0].get((fld, alpha))
        if hit is None:
            if fld not in self.fields:
                raise DerivationError(f"{fld.name} is not a field of this chart")
            raise JetOrderError(
                f"jet {fld.name}_{self._suffix(alpha)} needs order {sum(alpha)} but the "
                f"chart holds {fld.name} to order {self.field_order(fld)}; call prolong first"
            )
        return hit

    def jet_of(self, c: Coordinate):
        """``(field, α)`` for a field or jet coordinate, else ``None``."""
        return self._jet_tables[1].get(c)

    def jets(self, fld: Coordinate, k: int) -> list:
        return [self.jet(fld, a) for a in multi_indices(self.n, k)]

    @cached_property
    def parameters(self) -> tuple:
        return tuple(Coordinate(nm, "parameter", (), name_latex(nm)) for nm in self.parameter_names)

    @cached_property
    def coordinates(self) -> tuple:
        out = list(self.base)
        forward = self._jet_tables[0]
        for fld in self.fields:
            out.extend(c for (f, _), c in forward.items() if f == fld)
        out.extend(self.parameters)
        return tuple(out)

    @cached_property
    def _scope(self) -> dict:
        scope = {c.name: c for c in self.coordinates}
        for fn in self.functions:
            scope[fn.name] = fn
        return scope

    def lookup(self, name: str):
        return self._scope.get(name)

    def scope(self) -> dict:
        return dict(self._scope)

    def __contains__(self, c) -> bool:
        return isinstance(c, Coordinate) and self._scope.get(c.name) == c

    # -- derived charts -------------------------------------------------------

    def with_parameters(self, *names) -> "Chart":
        extra = tuple(nm for nm in names if nm not in self.parameter_names)
        return _replace(self, parameter_names=self.parameter_names + extra)

    def with_function(self, name: str, arguments, latex_name="") -> "Chart":
        args = tuple(self.lookup(a) if isinstance(a, str) else a for a in arguments)
        for a, raw in zip(args, arguments):
            if a is None or a not in self:
                raise DerivationError(f"function argument {raw!r} is not a chart coordinate")
        fn = FunctionSymbol(name, args, latex_name or name_latex(name))
        return _replace(self, functions=self.functions + (fn,))

    def with_momenta(self, prefix="p") -> "Chart":
        return _replace(self, momentum_prefix=prefix)

    def expr(self, text: str) -> Expr:
        from jetham.symcore.parse import parse_expr

        return parse_expr(text, self._scope)

    def fibration(self, name: str) -> "Fibration":
        return fibration(self, name)


def _replace(chart, **changes):
    from dataclasses import replace

    return replace(chart, **changes)


def prolong(chart: Chart, order: int) -> Chart:
    """Extend the ``y`` jets to ``order``; existing coordinates are unchanged."""
    if order < chart.order:
        raise JetOrderError(f"cannot prolong from order {chart.order} down to {order}")
    return _replace(chart, order=order)


def jet_count(n: int, k: int) -> int:
    """Number of symmetric multi-indices of length ``n`` and order ``k``."""
    return comb(n + k - 1, k)


# ---------------------------------------------------------------------------
# total derivatives, contact forms, splitting


def total_derivative(chart: Chart, lam: int, e) -> Expr:
    """``𝒟_λ e = ∂_λ e + Σ u_{α+λ} ∂e/∂u_α`` over every field of the chart."""
    e = as_expr(e)
    if not 1 <= lam <= chart.n:
        raise ValueError(f"base index {lam} outside 1..{chart.n}")
    out = e.diff(chart.base[lam - 1])
    for c in sorted(e.coordinates(), key=lambda c: c.sort_key):
        info = chart.jet_of(c)
        if info is None:
            continue
        partial = e.diff(c)
        if partial.is_zero:
            continue
        fld, alpha = info
        out = out + partial * chart.jet(fld, add_index(alpha, lam))
    return out


def contact_forms(chart: Chart, *, include_theta=False) -> list:
    """Contact forms ``ϑ^j_α = dy^j_α − y^j_{α+λ} dx^λ`` for ``|α| ≤ r−1``."""
    if chart.order < 1:
        raise JetOrderError("contact forms need a chart of jet order at least 1")
    fields = list(chart.fibers)
    if include_theta and chart.tau is not None:
        fields.insert(0, chart.tau)
    out = []
    for fld in fields:
        for k in range(0, chart.field_order(fld)):
            for alpha in multi_indices(chart.n, k):
                out.append(contact_form(chart, fld, alpha))
    return out


def contact_form(chart: Chart, fld: Coordinate, alpha) -> Form:
    terms = {(chart.jet(fld, alpha),): 1}
    for lam, x in enumerate(chart.base, start=1):
        terms[(x,)] = -as_expr(chart.jet(fld, add_index(alpha, lam)))
    return Form(terms, 1)


def _derivative_along(e: Expr, alpha, base) -> Expr:
    for lam, count in enumerate(alpha):
        for _ in range(count):
            e = e.diff(base[lam])
    return e


def prolongation_bindings(chart: Chart, section: dict) -> dict:
    """``u_α ↦ ∂^α s^u`` for every jet of the fields assigned by ``section``.

    ``section`` maps field coordinates (``τ``, ``y^i`` or momenta) to
    expressions in the base coordinates and parameters.
    """
    bind = {}
    for fld, value in section.items():
        value = as_expr(value)
        bad = [c.name for c in value.coordinates() if c.role not in ("base", "parameter")]
        if bad:
            raise SectionError(
                f"section value for {fld.name} mentions non-base coordinate(s) {', '.join(sorted(bad))}"
            )
        for k in range(0, chart.field_order(fld) + 1):
            for alpha in multi_indices(chart.n, k):
                bind[chart.jet(fld, alpha)] = _derivative_along(value, alpha, chart.base)
    return bind


def prolongation_pullback(chart: Chart, section: dict, a) -> Form:
    """Pull a form back along the jet prolongation of ``section``.

    Coefficients are substituted and each ``du_α`` becomes
    ``Σ_λ ∂_λ∂^α s^u dx^λ``.  Every non-base coordinate of the form must be
    covered by the section.
    """
    a = as_form(a)
    bind = prolongation_bindings(chart, section)
    base = set(chart.base)

    def one_form(c):
        if c in base:
            return Form.d(c)
        if c not in bind:
            raise SectionError(f"the section does not determine {c.name}")
        v = bind[c]
        return Form({(x,): v.diff(x) for x in chart.base}, 1)

    out = Form.zero(a.degree)
    for word, coeff in a.terms.items():
        coeff = coeff.subst(bind)
        left = [c.name for c in coeff.coordinates() if c.role not in ("base", "parameter")]
        if left:
            raise SectionError(f"the section does not determine {', '.join(sorted(left))}")
        piece = Form.scalar(coeff)
        for c in word:
            piece = wedge(piece, one_form(c))
        out = out + piece
    return out


def horizontal_vertical_split(chart: Chart, a) -> tuple:
    """Split a 1-form on ``J_{r−1}Y`` into ``(horizontal, vertical)`` parts.

    ``dx^λ`` stays horizontal; each ``du_α`` becomes
    ``ϑ^u_α + u_{α+λ} dx^λ``.  The two parts sum back to ``a`` exactly.
    """
    a = as_form(a)
    if a.is_zero:
        return Form.zero(1), Form.zero(1)
    if a.degree != 1:
        raise FormDegreeError(f"the splitting acts on 1-forms, got degree {a.degree}")
    horizontal = Form.zero(1)
    vertical = Form.zero(1)
    for (c,), coeff in a.terms.items():
        if c.role == "base":
            horizontal = horizontal + Form({(c,): coeff}, 1)
            continue
        info = chart.jet_of(c)
        if info is None:
            raise DerivationError(f"d{c.name} is not a chart differential")
        fld, alpha = info
        if sum(alpha) >= chart.field_order(fld):
            raise JetOrderError(
                f"d{c.name} is top order; the splitting needs forms on J_(r-1)"
            )
        theta = contact_form(chart, fld, alpha)
        vertical = vertical + theta * coeff
        for lam, x in enumerate(chart.base, start=1):
            horizontal = horizontal + Form(
                {(x,): coeff * chart.jet(fld, add_index(alpha, lam))}, 1
            )
    return horizontal, vertical


# ---------------------------------------------------------------------------
# fibrations, connections, sections

FIBRATIONS = ("Y->X", "Y->Theta", "Theta->X", "Pi->X", "Pi->Y", "Yh->X")


@dataclass(frozen=True)
class Fibration:
    name: str
    base: tuple
    fibers: tuple


def fibration(chart: Chart, name: str) -> Fibration:
    theta = (chart.tau,) if chart.tau is not None else ()
    moms = tuple(c for c in chart.fields if c.role == "momentum")
    need_theta = name in ("Y->Theta", "Theta->X")
    if need_theta and chart.tau is None:
        raise ConnectionMismatchError(f"{name} needs a chart with a τ coordinate")
    if name.startswith("Pi") and not moms:
        raise ConnectionMismatchError(f"{name} needs a chart with momenta")
    if name == "Y->X":
        return Fibration(name, chart.base, theta + chart.fibers)
    if name == "Y->Theta":
        return Fibration(name, chart.base + theta, chart.fibers)
    if name == "Theta->X":
        return Fibration(name, chart.base, theta)
    if name == "Pi->X":
        return Fibration(name, chart.base, theta + chart.fibers + moms)
    if name == "Pi->Y":
        return Fibration(name, chart.base + theta + chart.fibers, moms)
    if name == "Yh->X":
        return Fibration(name, chart.base, chart.fibers)
    raise ConnectionMismatchError(f"unknown fibration {name!r}; expected one of {FIBRATIONS}")


class Connection:
    """Components ``Γ^a_μ`` keyed by ``(fiber, base)`` coordinate pairs.

    Missing pairs default to zero so the table always covers the full
    fiber × base grid of its fibration.
    """

    __slots__ = ("fibration", "components")

    def __init__(self, fib: Fibration, components=None):
        self.fibration = fib
        allowed = {(f, b) for f in fib.fibers for b in fib.base}
        table = {}
        for key, value in (components or {}).items():
            if key not in allowed:
                f, b = key
                raise ConnectionMismatchError(
                    f"component ({getattr(f, 'name', f)}, {getattr(b, 'name', b)}) "
                    f"is not a fiber × base pair of {fib.name}"
                )
            table[key] = as_expr(value)
        for f in fib.fibers:
            for b in fib.base:
                table.setdefault((f, b), as_expr(0))
        self.components = table

    def __getitem__(self, key) -> Expr:
        return self.components[key]

    def __eq__(self, other):
        return (
            isinstance(other, Connection)
            and self.fibration == other.fibration
            and self.components == other.components
        )

    def __repr__(self):
        rows = ", ".join(
            f"{f.name}/{b.name}: {v}" for (f, b), v in self.components.items() if not v.is_zero
        )
        return f"Connection[{self.fibration.name}]({rows})"

    def horizontal_lift(self, b: Coordinate) -> dict:
        """Components of ``∂_b + Γ^a_b ∂_a``."""
        lift = {b: as_expr(1)}
        for f in self.fibration.fibers:
            v = self.components[(f, b)]
            if not v.is_zero:
                lift[f] = v
        return lift


@dataclass(frozen=True)
class SectionSpec:
    fibration: Fibration
    assignments: dict

    def __post_init__(self):
        allowed = set(self.fibration.base)
        fixed = {}
        for f, e in self.assignments.items():
            if f not in self.fibration.fibers:
                raise SectionError(f"{f.name} is not a fiber coordinate of {self.fibration.name}")
            e = as_expr(e)
            bad = [c.name for c in e.coordinates() if c not in allowed and c.role != "parameter"]
            if bad:
                raise SectionError(
                    f"section value for {f.name} mentions non-base coordinate(s) "
                    f"{', '.join(sorted(bad))}"
                )
            fixed[f] = e
        missing = [f.name for f in self.fibration.fibers if f not in fixed]
        if missing:
            raise SectionError(f"section leaves {', '.join(missing)} unassigned")
        object.__setattr__(self, "assignments", fixed)

    def __getitem__(self, f):
        return self.assignments[f]

    def __hash__(self):
        return hash((self.fibration, frozenset(self.assignments.items())))


def theta_section(chart: Chart, value) -> SectionSpec:
    """Section ``τ = h(x)`` of ``Θ → X``."""
    return SectionSpec(fibration(chart, "Theta->X"), {chart.tau: value})


def _jet_fibration(chart: Chart, fib: Fibration) -> Fibration:
    jets = tuple(
        chart.jet(f, unit(chart.n, lam)) for f in fib.fibers for lam in range(1, chart.n + 1)
    )
    return Fibration(f"J1({fib.name})", fib.base + fib.fibers, jets)


def connection_to_section(gamma: Connection, chart: Chart) -> SectionSpec:
    """The section ``u_λ ↦ Γ^u_λ`` of ``J_1 → total space``."""
    fib = gamma.fibration
    if fib.base != chart.base:
        raise ConnectionMismatchError(
            f"{fib.name} has no first-jet coordinates in this chart"
        )
    jf = _jet_fibration(chart, fib)
    assignments = {}
    for f in fib.fibers:
        for lam, x in enumerate(chart.base, start=1):
            assignments[chart.jet(f, unit(chart.n, lam))] = gamma[(f, x)]
    return SectionSpec(jf, assignments)


def section_to_connection(section: SectionSpec, fib: Fibration, chart: Chart) -> Connection:
    """Inverse of :func:`connection_to_section`."""
    table = {}
    for jet, value in section.assignments.items():
        info = chart.jet_of(jet)
        if info is None or sum(info[1]) != 1:
            raise ConnectionMismatchError(f"{jet.name} is not a first-order jet")
        f, alpha = info
        lam = alpha.index(1)
        table[(f, chart.base[lam])] = value
    return Connection(fib, table)


def composite_connection(h_theta: Connection, gamma: Connection, chart: Chart) -> Connection:
    """``γ = 𝔥_Θ ∘ Γ``: ``γ^τ_λ = Γ^τ_λ``, ``γ^i_λ = H^i_λ + H^i_τ Γ^τ_λ``."""
    if h_theta.fibration.name != "Y->Theta" or gamma.fibration.name != "Theta->X":
        raise ConnectionMismatchError(
            "composite connection needs connections on Y->Theta and Theta->X"
        )
    if h_theta.fibration != fibration(chart, "Y->Theta") or gamma.fibration != fibration(
        chart, "Theta->X"
    ):
        raise ConnectionMismatchError("connection component tables do not match the chart")
    tau = chart.tau
    table = {}
    for x in chart.base:
        g = gamma[(tau, x)]
        table[(tau, x)] = g
        for y in chart.fibers:
            table[(y, x)] = h_theta[(y, x)] + h_theta[(y, tau)] * g
    return Connection(fibration(chart, "Y->X"), table)


def _check_theta_section(h: SectionSpec, chart: Chart):
    if h.fibration.name != "Theta->X" or chart.tau not in h.assignments:
        raise SectionError("expected a section of Theta->X assigning τ")
    return h.assignments[chart.tau]


def pullback_connection(h_theta: Connection, h: SectionSpec, chart: Chart) -> Connection:
    """Connection induced on ``Y_h → X`` along the section ``τ = h(x)``."""
    if h_theta.fibration.name != "Y->Theta":
        raise ConnectionMismatchError("pull-back needs a connection on Y->Theta")
    hv = _check_theta_section(h, chart)
    tau = chart.tau
    bind = {tau: hv}
    table = {}
    for y in chart.fibers:
        h_tau = h_theta[(y, tau)].subst(bind)
        for x in chart.base:
            table[(y, x)] = h_theta[(y, x)].subst(bind) + h_tau * hv.diff(x)
    return Connection(fibration(chart, "Yh->X"), table)


def restrict_connection(gamma: Connection, h: SectionSpec, chart: Chart) -> Connection:
    """Restrict a connection on ``Y → X`` to ``Y_h`` (drop ``τ``, substitute ``τ = h``)."""
    if gamma.fibration.name != "Y->X":
        raise ConnectionMismatchError("restriction expects a connection on Y->X")
    hv = _check_theta_section(h, chart)
    bind = {chart.tau: hv}
    table = {
        (y, x): gamma[(y, x)].subst(bind) for y in chart.fibers for x in chart.base
    }
    return Connection(fibration(chart, "Yh->X"), table)


def integral_section_defect(h: SectionSpec, gamma: Connection) -> dict:
    """Nonzero ``∂_λ h^a − Γ^a_λ∘h`` components; empty iff ``h`` is integral."""
    fib = gamma.fibration
    if h.fibration.base != fib.base or set(h.fibration.fibers) != set(fib.fibers):
        raise ConnectionMismatchError("section and connection live on different fibrations")
    bind = dict(h.assignments)
    defect = {}
    for f in fib.fibers:
        for x in fib.base:
            d = h[f].diff(x) - gamma[(f, x)].subst(bind)
            if not d.is_zero:
                defect[(f, x)] = d
    return defect


def is_integral_section(h: SectionSpec, gamma: Connection) -> bool:
    return not integral_section_defect(h, gamma)


def reducibility_defect(h_theta: Connection, gamma: Connection, h: SectionSpec, chart: Chart) -> dict:
    """Components where the restricted composite and pull-back connections differ."""
    restricted = restrict_connection(composite_connection(h_theta, gamma, chart), h, chart)
    pulled = pullback_connection(h_theta, h, chart)
    out = {}
    for key, v in restricted.components.items():
        d = v - pulled[key]
        if not d.is_zero:
            out[key] = d
    return out


# ---------------------------------------------------------------------------
# covariant differentials


class CovariantDifferential:
    """Horizontal 1-forms ``Σ_λ D^i_λ dx^λ`` indexed by the fiber ``y^i``.

    Stands for ``dx^λ ⊗ D^i_λ ∂̄_i`` with values in the vertical cotangent
    directions of ``Y → Θ``.
    """

    __slots__ = ("chart", "components")

    def __init__(self, chart: Chart, components: dict):
        self.chart = chart
        self.components = {k: as_expr(v) for k, v in components.items()}

    def __getitem__(self, key) -> Expr:
        return self.components[key]

    def forms(self) -> dict:
        return {
            y: Form({(x,): self.components[(y, x)] for x in self.chart.base}, 1)
            for y in self.chart.fibers
        }

    def subst(self, bindings) -> "CovariantDifferential":
        return CovariantDifferential(
            self.chart, {k: v.subst(bindings) for k, v in self.components.items()}
        )

    def restrict(self, h: SectionSpec) -> "CovariantDifferential":
        """Restrict along ``τ = h(x)``: ``τ ↦ h``, ``τ_λ ↦ ∂_λ h``."""
        chart = self.chart
        hv = _check_theta_section(h, chart)
        bind = {chart.tau: hv}
        for lam, x in enumerate(chart.base, start=1):
            bind[chart.jet(chart.tau, unit(chart.n, lam))] = hv.diff(x)
        return self.subst(bind)

    def __eq__(self, other):
        return isinstance(other, CovariantDifferential) and self.components == other.components

    def __repr__(self):
        rows = ", ".join(f"{y.name}/{x.name}: {v}" for (y, x), v in self.components.items())
        return f"CovariantDifferential({rows})"


def vertical_covariant_differential(h_theta: Connection, chart: Chart) -> CovariantDifferential:
    """``Δ = dx^λ ⊗ (y^i_λ − H^i_λ − H^i_τ τ_λ) ∂̄_i`` on ``J_1Y``."""
    if h_theta.fibration.name != "Y->Theta":
        raise ConnectionMismatchError("the vertical covariant differential needs Y->Theta")
    if chart.tau is None or chart.theta_order < 1:
        raise JetOrderError("the chart must contain the τ_λ coordinates")
    if chart.order < 1:
        raise JetOrderError("the chart must contain the y_λ coordinates")
    tau = chart.tau
    comps = {}
    for y in chart.fibers:
        for lam, x in enumerate(chart.base, start=1):
            e = unit(chart.n, lam)
            comps[(y, x)] = (
                as_expr(chart.jet(y, e))
                - h_theta[(y, x)]
                - h_theta[(y, tau)] * chart.jet(tau, e)
            )
    return CovariantDifferential(chart, comps)


def covariant_differential(gamma: Connection, chart: Chart) -> CovariantDifferential:
    """``y^i_λ − Γ^i_λ`` for a connection on ``Y_h → X`` (or the y-part of ``Y → X``)."""
    if gamma.fibration.base != chart.base:
        raise ConnectionMismatchError("covariant differential needs a connection over X")
    comps = {}
    for y in chart.fibers:
        for lam, x in enumerate(chart.base, start=1):
            comps[(y, x)] = chart.jet(y, unit(chart.n, lam)) - gamma[(y, x)]
    return CovariantDifferential(chart, comps)
