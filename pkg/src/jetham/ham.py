"""Covariant Hamiltonian formalism on the extended Legendre bundle.

Coordinates are ``(x^λ, τ, y^i, p^λ_i)`` with first jets ``y^i_λ``,
``τ_λ`` and ``p^λ_{i,μ}``.  ``ω = dx^1∧…∧dx^n`` and ``ω_λ = ∂_λ ⌋ ω``.
The ``∂_τ`` leg is carried on valued forms; on scalar densities such as
``L_H`` it is implicit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from jetham.equations import EquationSystem
from jetham.errors import (
    ConnectionMismatchError,
    DegenerateLagrangianError,
    DerivationError,
    FormDegreeError,
    JetOrderError,
)
from jetham.excalc import (
    Form,
    ValuedForm,
    VectorField,
    absorb_tx_leg,
    interior,
    leg_contract,
    valued_ext_d,
    volume_contraction,
    volume_form,
    wedge,
)
from jetham.geom import (
    Chart,
    Connection,
    SectionSpec,
    fibration,
    prolongation_bindings,
    total_derivative,
    unit,
)
from jetham.symcore.expr import Expr, as_expr

_HAMILTONIAN_ROLES = {"base", "theta-fiber", "y-fiber", "momentum", "parameter"}


def legendre_chart(n: int, m: int, order: int = 1, **kwargs) -> Chart:
    """A chart of ``Π_Θ`` with momenta and their first jets."""
    return Chart.build(n, m, order, momenta=True, **kwargs)


@dataclass(frozen=True)
class HamiltonianSpec:
    chart: Chart
    hamiltonian: Expr

    def __post_init__(self):
        chart = self.chart
        if not chart.has_momenta or chart.tau is None:
            raise DerivationError("a Hamiltonian lives on a chart with τ and momenta")
        h = as_expr(self.hamiltonian)
        for c in h.coordinates():
            if c.role not in _HAMILTONIAN_ROLES:
                raise DerivationError(
                    f"Hamiltonian mentions jet coordinate {c.name}; it must be a function "
                    "on the Legendre bundle"
                )
            if c.role != "parameter" and c not in chart:
                raise DerivationError(f"Hamiltonian mentions {c.name}, which is not in the chart")
        object.__setattr__(self, "hamiltonian", h)

    def with_chart(self, chart: Chart) -> "HamiltonianSpec":
        return HamiltonianSpec(chart, self.hamiltonian)


def _momenta_by_leg(chart: Chart):
    """``[(λ, i, p^λ_i, y^i)]`` in a fixed order."""
    return [
        (lam, i, chart.momenta[(lam, i)], chart.fibers[i - 1])
        for i in range(1, chart.m + 1)
        for lam in range(1, chart.n + 1)
    ]


def liouville_form(chart: Chart) -> ValuedForm:
    """``ϑ_Y = p^λ_i dy^i ∧ ω ⊗ ∂_λ ⊗ ∂_τ``."""
    omega = volume_form(chart.base)
    comps = {}
    for lam, _, p, y in _momenta_by_leg(chart):
        piece = wedge(Form.d(y), omega) * p
        comps[(lam, True)] = comps[(lam, True)] + piece if (lam, True) in comps else piece
    return ValuedForm(chart.base, comps)


def polysymplectic_form(chart: Chart) -> ValuedForm:
    """``Ω_Y = dp^λ_i ∧ dy^i ∧ ω ⊗ ∂_λ ⊗ ∂_τ``."""
    omega = volume_form(chart.base)
    comps = {}
    for lam, _, p, y in _momenta_by_leg(chart):
        piece = wedge(Form.d(p, y), omega)
        comps[(lam, True)] = comps[(lam, True)] + piece if (lam, True) in comps else piece
    return ValuedForm(chart.base, comps)


def absorbed_liouville_form(chart: Chart) -> ValuedForm:
    """``p^λ_i dy^i ∧ ω_λ ⊗ ∂_τ``."""
    return absorb_tx_leg(liouville_form(chart))


def absorbed_polysymplectic_form(chart: Chart) -> ValuedForm:
    """``dp^λ_i ∧ dy^i ∧ ω_λ ⊗ ∂_τ``."""
    return absorb_tx_leg(polysymplectic_form(chart))


def polysymplectic_relation(chart: Chart, psi):
    """Both sides of ``d(ϑ_Y ⌋ ψ) = Ω_Y ⌋ ψ`` for a 1-form ``ψ`` on Θ."""
    lhs = valued_ext_d(leg_contract(liouville_form(chart), psi))
    rhs = leg_contract(polysymplectic_form(chart), psi)
    return lhs, rhs


def hamiltonian_form(spec: HamiltonianSpec) -> ValuedForm:
    """``H = (p^λ_i dy^i ∧ ω_λ − 𝓗 ω) ⊗ ∂_τ``."""
    chart = spec.chart
    form = volume_form(chart.base) * (-spec.hamiltonian)
    for lam, _, p, y in _momenta_by_leg(chart):
        form = form + wedge(Form.d(y), volume_contraction(chart.base, lam)) * p
    return ValuedForm(chart.base, {(None, True): form})


def hamiltonian_connection_contraction(gamma: Connection, omega: ValuedForm) -> ValuedForm:
    """Leg-matched contraction ``Σ_λ v_λ ⌋ Ω^λ``.

    ``v_λ = ∂_λ + γ^a_λ ∂_a`` is the horizontal lift of ``∂_λ`` and is
    inserted only into the component carrying the TX-leg ``∂_λ``.
    """
    if gamma.fibration.name != "Pi->X":
        raise ConnectionMismatchError("expected a connection on Pi->X")
    if tuple(gamma.fibration.base) != omega.base:
        raise ConnectionMismatchError("connection and form use different base coordinates")
    out = {}
    for (lam, theta), form in omega.components.items():
        if lam is None:
            raise FormDegreeError("every component of the form needs a TX-leg to contract")
        x = omega.base[lam - 1]
        v = VectorField(gamma.horizontal_lift(x))
        piece = interior(v, form)
        key = (None, theta)
        out[key] = out[key] + piece if key in out else piece
    return ValuedForm(omega.base, out)


def closedness_defect(gamma: Connection, chart: Chart) -> ValuedForm:
    """``d(γ ⌋ Ω_Y)``; zero exactly for Hamiltonian connections."""
    return valued_ext_d(hamiltonian_connection_contraction(gamma, polysymplectic_form(chart)))


def is_hamiltonian_connection(gamma: Connection, chart: Chart) -> bool:
    return closedness_defect(gamma, chart).is_zero


def solve_hamiltonian_connection(spec: HamiltonianSpec) -> Connection:
    """A connection ``γ_H`` with ``γ_H ⌋ Ω_Y = dH``.

    ``γ^i_λ = ∂𝓗/∂p^λ_i``; the trace condition ``Σ_λ γ^λ_{iλ} = −∂𝓗/∂y^i`` is
    met by spreading it evenly over the diagonal, off-diagonal and ``τ``
    components are zero.
    """
    chart = spec.chart
    h = spec.hamiltonian
    share = Fraction(1, chart.n)
    table = {}
    for lam, i, p, y in _momenta_by_leg(chart):
        x = chart.base[lam - 1]
        table[(y, x)] = h.diff(p)
        table[(p, x)] = -h.diff(y) * share
    return Connection(fibration(chart, "Pi->X"), table)


def lagrangian_LH(spec: HamiltonianSpec) -> Expr:
    """Scalar density ``p^λ_i y^i_λ − 𝓗`` of ``L_H`` (the ``∂_τ`` tag is implicit)."""
    chart = spec.chart
    out = -spec.hamiltonian
    for lam, _, p, y in _momenta_by_leg(chart):
        out = out + p * chart.jet(y, unit(chart.n, lam))
    return out


def euler_lagrange(L, chart: Chart, fields=None) -> EquationSystem:
    """``∂L/∂u − Σ_λ 𝒟_λ(∂L/∂u_λ) = 0`` for each field ``u``.

    ``fields`` defaults to the ``y`` fibers.  The total derivative runs over
    every field of the chart, so momentum jets appear where ``L`` has momenta.
    """
    L = as_expr(L)
    fields = tuple(chart.fibers if fields is None else fields)
    for c in L.coordinates():
        info = chart.jet_of(c)
        if info is not None and info[0] in fields and sum(info[1]) > 1:
            raise JetOrderError(f"Lagrangian depends on {c.name}; only first-order jets are allowed")
    rows = []
    for u in fields:
        residual = L.diff(u)
        for lam in range(1, chart.n + 1):
            residual = residual - total_derivative(chart, lam, L.diff(chart.jet(u, unit(chart.n, lam))))
        rows.append((f"EL[{u.name}]", residual, 0))
    return EquationSystem.of(rows, chart)


def hamilton_equations(spec: HamiltonianSpec) -> EquationSystem:
    """``y^i_λ = ∂𝓗/∂p^λ_i`` and ``Σ_λ p^λ_{i,λ} = −∂𝓗/∂y^i``."""
    chart = spec.chart
    h = spec.hamiltonian
    rows = []
    for lam, i, p, y in _momenta_by_leg(chart):
        rows.append((chart.jet(y, unit(chart.n, lam)).name, chart.jet(y, unit(chart.n, lam)), h.diff(p)))
    for i, y in enumerate(chart.fibers, start=1):
        div = as_expr(0)
        for lam in range(1, chart.n + 1):
            div = div + chart.jet(chart.momenta[(lam, i)], unit(chart.n, lam))
        rows.append((f"div[{y.name}]", div, -h.diff(y)))
    return EquationSystem.of(rows, chart)


def section_bindings(chart: Chart, h: SectionSpec, sigma: SectionSpec | None = None) -> dict:
    """Bindings realizing ``τ = h(x)`` and optionally ``y = σ(x, h(x))`` on all jets."""
    if h.fibration.name != "Theta->X" or chart.tau not in h.assignments:
        raise DerivationError("h must be a section of Theta->X")
    hv = h.assignments[chart.tau]
    values = {chart.tau: hv}
    if sigma is not None:
        if sigma.fibration.name != "Y->Theta":
            raise DerivationError("σ must be a section of Y->Theta")
        for y in chart.fibers:
            values[y] = sigma.assignments[y].subst({chart.tau: hv})
    return prolongation_bindings(chart, values)


def restrict_by_section(sys: EquationSystem, h: SectionSpec, sigma: SectionSpec | None = None,
                        chart: Chart | None = None) -> EquationSystem:
    """Substitute ``τ ↦ h``, ``τ_λ ↦ ∂_λ h`` (and ``y ↦ σ∘h`` when given)."""
    chart = chart or sys.chart
    if chart is None:
        raise DerivationError("restriction needs the chart of the system")
    return sys.subst(section_bindings(chart, h, sigma))


def substitute_section(spec: HamiltonianSpec, h: SectionSpec) -> HamiltonianSpec:
    """``𝓗|_{τ=h}`` as a new spec on the same chart."""
    return HamiltonianSpec(spec.chart, spec.hamiltonian.subst(section_bindings(spec.chart, h)))


# ---------------------------------------------------------------------------
# Legendre transform and momentum elimination


def _solve_linear(matrix, rhs, error=DerivationError):
    """Solve ``matrix · v = rhs`` with rational ``matrix`` and expression ``rhs``."""
    size = len(matrix)
    a = [[Fraction(v) for v in row] for row in matrix]
    b = [as_expr(v) for v in rhs]
    for col in range(size):
        pivot = next((r for r in range(col, size) if a[r][col] != 0), None)
        if pivot is None:
            raise error("coefficient matrix is singular")
        a[col], a[pivot] = a[pivot], a[col]
        b[col], b[pivot] = b[pivot], b[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        b[col] = b[col] * inv
        for r in range(size):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [vr - f * vc for vr, vc in zip(a[r], a[col])]
                b[r] = b[r] - b[col] * f
    return b


def _velocities(chart: Chart):
    return [
        (lam, i, chart.jet(y, unit(chart.n, lam)), chart.momenta[(lam, i)])
        for lam, i, _, y in _momenta_by_leg(chart)
    ]


def legendre_of_lagrangian(L, chart: Chart) -> HamiltonianSpec:
    """Legendre transform of a Lagrangian quadratic in ``y^i_λ``.

    The Hessian in the velocities must be a constant invertible matrix.
    """
    L = as_expr(L)
    if not chart.has_momenta:
        raise DerivationError("the chart needs momenta for the Legendre transform")
    vel = _velocities(chart)
    vel_coords = {v for _, _, v, _ in vel}
    for c in L.coordinates():
        if c.role in ("jet", "theta-jet", "momentum-jet", "momentum") and c not in vel_coords:
            raise DerivationError(f"Lagrangian may only depend on x, y and y_λ; found {c.name}")
    grads = [L.diff(v) for _, _, v, _ in vel]
    hessian = []
    for g in grads:
        row = []
        for _, _, v, _ in vel:
            entry = g.diff(v)
            if not entry.is_constant:
                raise DegenerateLagrangianError(
                    "the velocity Hessian must have constant coefficients"
                )
            row.append(entry.constant)
        hessian.append(row)
    at_rest = {v: 0 for _, _, v, _ in vel}
    b = [g.subst(at_rest) for g in grads]
    rhs = [as_expr(p) - bk for (_, _, _, p), bk in zip(vel, b)]
    solution = _solve_linear(hessian, rhs, DegenerateLagrangianError)
    sol = {v: s for (_, _, v, _), s in zip(vel, solution)}
    h = -L.subst(sol)
    for (_, _, v, p) in vel:
        h = h + as_expr(p) * sol[v]
    return HamiltonianSpec(chart, h)


def eliminate_momenta(sys: EquationSystem, chart: Chart | None = None) -> EquationSystem:
    """Solve the velocity equations for the momenta and substitute them.

    Equations mentioning momenta but no momentum jets are taken as the
    velocity equations; they must be linear in the momenta with constant
    coefficients.  Momentum jets become total derivatives of the solution.
    """
    chart = chart or sys.chart
    moms = list(chart.momenta.values())
    velocity = []
    rest = []
    for eq in sys:
        roles = {c.role for c in eq.residual.coordinates()}
        if "momentum" in roles and "momentum-jet" not in roles:
            velocity.append(eq)
        else:
            rest.append(eq)
    if len(velocity) != len(moms):
        raise DerivationError(
            f"found {len(velocity)} velocity equations for {len(moms)} momenta"
        )
    matrix = []
    rhs = []
    zero = {p: 0 for p in moms}
    for eq in velocity:
        r = eq.residual
        row = []
        for p in moms:
            coeff = r.diff(p)
            if not coeff.is_constant:
                raise DerivationError("velocity equations must be linear in the momenta")
            row.append(coeff.constant)
        matrix.append(row)
        rhs.append(-r.subst(zero))
    solution = _solve_linear(matrix, rhs)
    bind = {}
    for p, s in zip(moms, solution):
        bind[p] = s
        for lam in range(1, chart.n + 1):
            bind[chart.jet(p, unit(chart.n, lam))] = total_derivative(chart, lam, s)
    return EquationSystem(tuple(eq.subst(bind) for eq in rest), chart)
