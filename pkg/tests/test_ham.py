import random

import pytest
import sympy as sp

from _gen import random_hamiltonian, random_legendre_chart, random_theta_section
from _oracle import (
    euler_lagrange_residuals,
    hamilton_residuals,
    legendre,
    residuals,
    same_systems,
    to_sympy,
)
from jetham import ham
from jetham.equations import EquationSystem
from jetham.errors import DegenerateLagrangianError, DerivationError, JetOrderError
from jetham.excalc import Form, ValuedForm, ext_d, valued_ext_d, volume_contraction, volume_form, wedge
from jetham.geom import Chart, Connection, SectionSpec, fibration, prolong, theta_section
from jetham.symcore import FunctionSymbol, as_expr, make_expr


def oscillator():
    chart = ham.legendre_chart(1, 1).with_parameters("w0")
    h = make_expr("p^2/2 + w0^2*y^2/2", chart.scope())
    return ham.HamiltonianSpec(chart, h)


def klein_gordon():
    chart = ham.legendre_chart(2, 1).with_parameters("mu")
    h = make_expr("(p[1]^2 - p[2]^2)/2 + mu^2*y^2/2", chart.scope())
    return ham.HamiltonianSpec(chart, h)


def system(chart, *rows):
    scope = chart.scope()
    return EquationSystem.of([(f"e{k}", make_expr(l, scope), make_expr(r, scope)) for k, (l, r) in enumerate(rows)])


# -- forms -----------------------------------------------------------------------


def test_liouville_n1():
    c = ham.legendre_chart(1, 1)
    x, y, p = c.lookup("x"), c.lookup("y"), c.lookup("p")
    want = ValuedForm(c.base, {(1, True): wedge(Form.d(y), Form.d(x)) * p})
    assert ham.liouville_form(c) == want


def test_liouville_vanishes_at_zero_momentum():
    c = ham.legendre_chart(2, 2)
    zero = {p: 0 for p in c.momenta.values()}
    assert ham.liouville_form(c).subst(zero).is_zero


def test_polysymplectic_n1():
    c = ham.legendre_chart(1, 1)
    x, y, p = c.lookup("x"), c.lookup("y"), c.lookup("p")
    want = ValuedForm(c.base, {(1, True): Form.d(p, y, x)})
    assert ham.polysymplectic_form(c) == want


def test_absorbed_liouville_differentiates_to_absorbed_polysymplectic():
    for n, m in [(1, 1), (2, 1), (2, 2), (3, 1)]:
        c = ham.legendre_chart(n, m)
        assert valued_ext_d(ham.absorbed_liouville_form(c)) == ham.absorbed_polysymplectic_form(c)


def test_polysymplectic_contracted_with_dtau():
    from jetham.excalc import leg_contract

    c = ham.legendre_chart(2, 1)
    got = leg_contract(ham.polysymplectic_form(c), Form.d(c.tau))
    want = ValuedForm(
        c.base,
        {(lam, False): wedge(Form.d(c.momenta[(lam, 1)], c.fibers[0]), volume_form(c.base)) for lam in (1, 2)},
    )
    assert got == want


def test_hamiltonian_form_examples():
    c = ham.legendre_chart(1, 1)
    x, y, p = c.lookup("x"), c.lookup("y"), c.lookup("p")
    zero = ham.hamiltonian_form(ham.HamiltonianSpec(c, as_expr(0)))
    assert zero == ValuedForm(c.base, {(None, True): Form.d(y) * p})
    spec = ham.HamiltonianSpec(c, as_expr(p) * p / 2)
    want = Form.d(y) * p - Form.d(x) * (as_expr(p) * p / 2)
    assert ham.hamiltonian_form(spec) == ValuedForm(c.base, {(None, True): want})


def test_exterior_derivative_of_hamiltonian_form_symbolic():
    c = ham.legendre_chart(2, 1)
    fn = FunctionSymbol("H", (*c.base, c.tau, *c.fibers, *c.momenta.values()))
    spec = ham.HamiltonianSpec(c, fn.expr)
    got = valued_ext_d(ham.hamiltonian_form(spec))
    y = c.fibers[0]
    want = wedge(ext_d(-fn.expr), volume_form(c.base))
    for lam in (1, 2):
        want = want + wedge(Form.d(c.momenta[(lam, 1)], y), volume_contraction(c.base, lam))
    assert got == ValuedForm(c.base, {(None, True): want})


def test_hamiltonian_spec_rejects_jets():
    c = ham.legendre_chart(1, 1)
    with pytest.raises(DerivationError):
        ham.HamiltonianSpec(c, as_expr(c.lookup("y_x")))


# -- connections -------------------------------------------------------------------


def test_zero_connection_contraction():
    c = ham.legendre_chart(2, 1)
    gamma = Connection(fibration(c, "Pi->X"))
    got = ham.hamiltonian_connection_contraction(gamma, ham.polysymplectic_form(c))
    assert got == ham.absorbed_polysymplectic_form(c)
    assert ham.is_hamiltonian_connection(gamma, c)


def test_generic_contraction_three_terms():
    c = ham.legendre_chart(2, 1)
    rng = random.Random(1)
    from _gen import random_poly

    atoms = list(c.base) + [c.tau] + list(c.fibers) + list(c.momenta.values())
    fib = fibration(c, "Pi->X")
    table = {(f, x): random_poly(rng, atoms, 2, 3) for f in fib.fibers for x in c.base}
    gamma = Connection(fib, table)
    got = ham.hamiltonian_connection_contraction(gamma, ham.polysymplectic_form(c))
    y = c.fibers[0]
    omega = volume_form(c.base)
    trace = sum((table[(c.momenta[(lam, 1)], x)] for lam, x in zip((1, 2), c.base)), as_expr(0))
    want = wedge(Form.d(y), omega) * trace
    for lam, x in zip((1, 2), c.base):
        p = c.momenta[(lam, 1)]
        want = want - wedge(Form.d(p), omega) * table[(y, x)]
        want = want + wedge(Form.d(p, y), volume_contraction(c.base, lam))
    assert got == ValuedForm(c.base, {(None, True): want})


def test_non_hamiltonian_connection_has_witness():
    c = ham.legendre_chart(1, 1)
    x, y, p = c.lookup("x"), c.lookup("y"), c.lookup("p")
    gamma = Connection(fibration(c, "Pi->X"), {(y, x): as_expr(p) * y})
    defect = ham.closedness_defect(gamma, c)
    assert not defect.is_zero
    assert not ham.is_hamiltonian_connection(gamma, c)
    # d(−p y dp∧dx) = −p dy∧dp∧dx; oracle by hand
    assert defect == ValuedForm(c.base, {(None, True): Form.d(p, y, x) * p})


def test_solve_examples():
    c = ham.legendre_chart(1, 1)
    assert all(v == 0 for v in ham.solve_hamiltonian_connection(ham.HamiltonianSpec(c, as_expr(0))).components.values())
    spec = oscillator()
    c = spec.chart
    x, y, p = c.lookup("x"), c.lookup("y"), c.lookup("p")
    gamma = ham.solve_hamiltonian_connection(spec)
    w0 = c.lookup("w0")
    assert gamma[(y, x)] == as_expr(p)
    assert gamma[(p, x)] == -as_expr(w0) * w0 * y
    assert gamma[(c.tau, x)] == 0


def test_solved_connection_satisfies_identity_symbolic():
    c = ham.legendre_chart(2, 2)
    fn = FunctionSymbol("H", (*c.base, *c.fibers, *c.momenta.values()))
    spec = ham.HamiltonianSpec(c, fn.expr)
    gamma = ham.solve_hamiltonian_connection(spec)
    contraction = ham.hamiltonian_connection_contraction(gamma, ham.polysymplectic_form(c))
    assert contraction == valued_ext_d(ham.hamiltonian_form(spec))
    assert ham.is_hamiltonian_connection(gamma, c)


def test_other_trace_gauges_are_hamiltonian_too():
    spec = klein_gordon()
    c = spec.chart
    gamma = ham.solve_hamiltonian_connection(spec)
    y = c.fibers[0]
    p1, p2 = c.momenta[(1, 1)], c.momenta[(2, 1)]
    x1, x2 = c.base
    shifted = dict(gamma.components)
    shifted[(p1, x1)] = gamma[(p1, x1)] + 5
    shifted[(p2, x2)] = gamma[(p2, x2)] - 5
    shifted[(p1, x2)] = as_expr(y)
    other = Connection(gamma.fibration, shifted)
    contraction = ham.hamiltonian_connection_contraction(other, ham.polysymplectic_form(c))
    assert contraction == valued_ext_d(ham.hamiltonian_form(spec))


def test_tau_dependent_hamiltonian_breaks_the_contraction_identity():
    # dH carries −∂_τ𝓗 dτ∧ω, which no insertion of a horizontal lift produces
    c = ham.legendre_chart(1, 1)
    tau, x, p = c.tau, c.lookup("x"), c.lookup("p")
    spec = ham.HamiltonianSpec(c, as_expr(tau) * p * p / 2)
    gamma = ham.solve_hamiltonian_connection(spec)
    gap = valued_ext_d(ham.hamiltonian_form(spec)) - ham.hamiltonian_connection_contraction(
        gamma, ham.polysymplectic_form(c)
    )
    want = Form.d(tau, x) * (-(as_expr(p) * p / 2))
    assert gap == ValuedForm(c.base, {(None, True): want})
    assert not ham.is_hamiltonian_connection(gamma, c)


# -- L_H and Euler-Lagrange -------------------------------------------------------


def test_lagrangian_examples():
    c = ham.legendre_chart(2, 1)
    y = c.fibers[0]
    zero = ham.lagrangian_LH(ham.HamiltonianSpec(c, as_expr(0)))
    assert zero == as_expr(c.momenta[(1, 1)]) * c.jet(y, (1, 0)) + as_expr(c.momenta[(2, 1)]) * c.jet(y, (0, 1))
    c = ham.legendre_chart(1, 1)
    p, yx = c.lookup("p"), c.lookup("y_x")
    spec = ham.HamiltonianSpec(c, as_expr(p) * p / 2)
    assert ham.lagrangian_LH(spec) == as_expr(p) * yx - as_expr(p) * p / 2


def test_euler_lagrange_laplace():
    c = Chart.build(2, 1, 2)
    L = make_expr("(y_1^2 + y_2^2)/2", c.scope())
    got = ham.euler_lagrange(L, c)
    assert got == system(c, ("y_11 + y_22", "0"))
    assert same_systems(residuals(got), euler_lagrange_residuals(c, L, c.fibers))


def test_euler_lagrange_free_particle():
    c = ham.legendre_chart(1, 1, order=2)
    L = make_expr("p*y_x - p^2/2", c.scope())
    fields = [c.lookup("y"), c.lookup("p")]
    got = ham.euler_lagrange(L, c, fields)
    assert got == system(c, ("y_x", "p"), ("p_x", "0"))


def test_euler_lagrange_unused_field():
    c = Chart.build(1, 2, 2)
    L = make_expr("y1_x^2", c.scope())
    got = ham.euler_lagrange(L, c)
    assert got.by_label("EL[y2]").residual == 0


def test_euler_lagrange_rejects_second_order_lagrangian():
    c = Chart.build(1, 1, 2)
    with pytest.raises(JetOrderError):
        ham.euler_lagrange(as_expr(c.lookup("y_xx")), c)


def test_euler_lagrange_needs_prolonged_chart():
    c = Chart.build(1, 1, 1)
    with pytest.raises(JetOrderError):
        ham.euler_lagrange(make_expr("y_x^2", c.scope()), c)


# -- Hamilton equations -----------------------------------------------------------------


def test_hamilton_zero():
    c = ham.legendre_chart(2, 1)
    got = ham.hamilton_equations(ham.HamiltonianSpec(c, as_expr(0)))
    assert got == system(c, ("y_1", "0"), ("y_2", "0"), ("p[1]_1 + p[2]_2", "0"))


def test_hamilton_oscillator():
    spec = oscillator()
    got = ham.hamilton_equations(spec)
    assert same_systems(residuals(got), hamilton_residuals(spec.chart, spec.hamiltonian))
    assert got == system(spec.chart, ("y_x", "p"), ("p_x", "-w0^2*y"))


def test_hamilton_klein_gordon_and_elimination():
    spec = klein_gordon()
    c = spec.chart
    got = ham.hamilton_equations(spec)
    assert same_systems(residuals(got), hamilton_residuals(c, spec.hamiltonian))
    assert got == system(c, ("y_1", "p[1]"), ("y_2", "-p[2]"), ("p[1]_1 + p[2]_2", "-mu^2*y"))
    # oracle: substitute p¹ = y_1, p² = −y_2 into the divergence by hand in sympy
    p1, p2 = sp.symbols("p[1] p[2]")
    velocity = sp.solve([sp.Symbol("y_1") - p1, sp.Symbol("y_2") + p2], [p1, p2])
    divergence = sp.diff(velocity[p1], sp.Symbol("y_1")) * sp.Symbol("y_11") + sp.diff(
        velocity[p2], sp.Symbol("y_2")
    ) * sp.Symbol("y_22")
    hand = divergence + sp.Symbol("mu") ** 2 * sp.Symbol("y")
    order2 = prolong(c, 2)
    reduced = ham.eliminate_momenta(ham.hamilton_equations(spec.with_chart(order2)), order2)
    assert len(reduced) == 1
    assert same_systems(residuals(reduced), [hand])


def test_hamilton_equals_euler_lagrange_symbolic():
    for n, m in [(1, 1), (2, 1), (2, 2)]:
        c = ham.legendre_chart(n, m, order=2)
        fn = FunctionSymbol("H", (*c.base, *c.fibers, *c.momenta.values()))
        spec = ham.HamiltonianSpec(c, fn.expr)
        fields = list(c.fibers) + list(c.momenta.values())
        assert ham.hamilton_equations(spec) == ham.euler_lagrange(ham.lagrangian_LH(spec), c, fields)


def test_hamilton_equals_euler_lagrange_tau_dependent():
    rng = random.Random(21)
    for _ in range(10):
        c = prolong(random_legendre_chart(rng), 2)
        spec = random_hamiltonian(rng, c, tau=True)
        fields = list(c.fibers) + list(c.momenta.values())
        assert ham.hamilton_equations(spec) == ham.euler_lagrange(ham.lagrangian_LH(spec), c, fields)


# -- restriction -------------------------------------------------------------------------


def test_restrict_tau_free_unchanged():
    spec = oscillator()
    h = random_theta_section(random.Random(2), spec.chart)
    sys = ham.hamilton_equations(spec)
    assert ham.restrict_by_section(sys, h) == sys


def test_restrict_example():
    c = ham.legendre_chart(1, 1)
    x, tau, p = c.lookup("x"), c.tau, c.lookup("p")
    spec = ham.HamiltonianSpec(c, as_expr(tau) * p * p / 2)
    got = ham.restrict_by_section(ham.hamilton_equations(spec), theta_section(c, x))
    assert got == system(c, ("y_x", "x*p"), ("p_x", "0"))


def test_restrict_two_paths():
    rng = random.Random(4)
    for _ in range(10):
        c = random_legendre_chart(rng)
        spec = random_hamiltonian(rng, c, tau=True)
        h = random_theta_section(rng, c)
        one = ham.restrict_by_section(ham.hamilton_equations(spec), h)
        two = ham.hamilton_equations(ham.substitute_section(spec, h))
        assert one == two
        assert c.tau not in {a for eq in one for a in eq.residual.coordinates()}


def test_restrict_with_fiber_section():
    c = ham.legendre_chart(1, 1)
    x, tau, y = c.lookup("x"), c.tau, c.lookup("y")
    sigma = SectionSpec(fibration(c, "Y->Theta"), {y: as_expr(tau) * x})
    spec = ham.HamiltonianSpec(c, make_expr("p^2/2 + y^2/2", c.scope()))
    got = ham.restrict_by_section(ham.hamilton_equations(spec), theta_section(c, x), sigma)
    # y = x², so y_x = 2x
    assert got == system(c, ("2*x", "p"), ("p_x", "-x^2"))


def test_restrict_rejects_wrong_section():
    c = ham.legendre_chart(1, 1)
    sys = ham.hamilton_equations(ham.HamiltonianSpec(c, as_expr(0)))
    bad = SectionSpec(fibration(c, "Y->Theta"), {c.fibers[0]: as_expr(1)})
    with pytest.raises(DerivationError):
        ham.restrict_by_section(sys, bad)


# -- Legendre --------------------------------------------------------------------------------


def test_legendre_free():
    c = ham.legendre_chart(1, 1)
    L = make_expr("y_x^2/2", c.scope())
    spec = ham.legendre_of_lagrangian(L, c)
    assert to_sympy(spec.hamiltonian) == legendre(c, L)
    assert spec.hamiltonian == make_expr("p^2/2", c.scope())


def test_legendre_klein_gordon():
    c = ham.legendre_chart(2, 1).with_parameters("mu")
    L = make_expr("y_1^2/2 - y_2^2/2 - mu^2*y^2/2", c.scope())
    spec = ham.legendre_of_lagrangian(L, c)
    assert to_sympy(spec.hamiltonian) == legendre(c, L)
    assert spec.hamiltonian == klein_gordon().hamiltonian


def test_legendre_with_linear_terms_matches_oracle():
    c = ham.legendre_chart(2, 2)
    L = make_expr("y1_1^2 + y1_1*y2_2 + y2_2^2 - y2_1^2/2 + y1_2^2/3 + x1*y1_2 - y1*y2", c.scope())
    spec = ham.legendre_of_lagrangian(L, c)
    assert to_sympy(spec.hamiltonian) == legendre(c, L)


def test_legendre_degenerate():
    c = ham.legendre_chart(2, 1)
    # (y_1 + y_2)^2 has a rank-one velocity Hessian
    with pytest.raises(DegenerateLagrangianError):
        ham.legendre_of_lagrangian(make_expr("(y_1 + y_2)^2", c.scope()), c)
    with pytest.raises(DegenerateLagrangianError):
        ham.legendre_of_lagrangian(make_expr("y_1^2 + y*y_2", c.scope()), c)
    with pytest.raises(DegenerateLagrangianError):
        ham.legendre_of_lagrangian(make_expr("y*y_1^2", c.scope()), c)


def test_legendre_of_mixed_product_is_regular():
    # the Hessian of y_1*y_2 is [[0,1],[1,0]], which is invertible
    c = ham.legendre_chart(2, 1)
    L = make_expr("y_1*y_2", c.scope())
    spec = ham.legendre_of_lagrangian(L, c)
    assert to_sympy(spec.hamiltonian) == legendre(c, L)
    assert spec.hamiltonian == make_expr("p[1]*p[2]", c.scope())


def test_legendre_round_trip():
    c = ham.legendre_chart(2, 1, order=2).with_parameters("mu")
    L = make_expr("y_1^2/2 - y_2^2/2 - mu^2*y^2/2", c.scope())
    spec = ham.legendre_of_lagrangian(L, c)
    reduced = ham.eliminate_momenta(ham.hamilton_equations(spec), c)
    assert reduced == ham.euler_lagrange(L, c)
    assert same_systems(residuals(reduced), euler_lagrange_residuals(c, L, c.fibers))
