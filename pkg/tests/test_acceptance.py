"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

All comparisons are exact symbolic equalities; there is no floating point
anywhere, so the tolerance of every criterion is zero.
"""

import os
import random
import subprocess
import sys
from pathlib import Path

import sympy as sp

import conftest
from _gen import (
    random_component_tables,
    random_hamiltonian,
    random_legendre_chart,
    random_poly,
    random_theta_section,
)
from _oracle import (
    composite,
    euler_lagrange_residuals,
    hamilton_residuals,
    legendre,
    residuals,
    same_systems,
    to_sympy,
)
from jetham import ham
from jetham.excalc import Form, ext_d, leg_contract, valued_ext_d, wedge
from jetham.geom import (
    Chart,
    Connection,
    connection_to_section,
    contact_forms,
    fibration,
    horizontal_vertical_split,
    is_integral_section,
    prolong,
    prolongation_pullback,
    reducibility_defect,
    section_to_connection,
    total_derivative,
)
from jetham.symcore import FunctionSymbol, make_expr

ROOT = Path(__file__).resolve().parents[1]


def report(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    conftest.ACCEPTANCE_LINES.append(line)
    assert ok, line


def hamiltonian_corpus():
    """Symbolic, oscillator, Klein-Gordon and 60 random τ-free Hamiltonians."""
    corpus = []
    for n, m in [(1, 1), (2, 1), (2, 2), (3, 2)]:
        c = ham.legendre_chart(n, m, order=2)
        fn = FunctionSymbol("H", (*c.base, *c.fibers, *c.momenta.values()))
        corpus.append(("symbolic", ham.HamiltonianSpec(c, fn.expr)))
    c = ham.legendre_chart(1, 1, order=2).with_parameters("w0")
    corpus.append(("oscillator", ham.HamiltonianSpec(c, make_expr("p^2/2 + w0^2*y^2/2", c.scope()))))
    c = ham.legendre_chart(2, 1, order=2).with_parameters("mu")
    corpus.append(
        ("klein-gordon", ham.HamiltonianSpec(c, make_expr("(p[1]^2 - p[2]^2)/2 + mu^2*y^2/2", c.scope())))
    )
    rng = random.Random(20260101)
    for _ in range(60):
        c = prolong(random_legendre_chart(rng), 2)
        corpus.append(("random", random_hamiltonian(rng, c, degree=3)))
    return corpus


CORPUS = hamiltonian_corpus()


def test_criterion_1_hamilton_equals_euler_lagrange():
    failures = []
    oracle_checked = 0
    for kind, spec in CORPUS:
        c = spec.chart
        fields = list(c.fibers) + list(c.momenta.values())
        hamilton = ham.hamilton_equations(spec)
        el = ham.euler_lagrange(ham.lagrangian_LH(spec), c, fields)
        if kind != "symbolic":
            # both sides recomputed independently in sympy first
            lh = ham.lagrangian_LH(spec)
            want_h = hamilton_residuals(c, spec.hamiltonian)
            want_el = euler_lagrange_residuals(c, lh, fields)
            oracle_checked += 1
            if not (same_systems(residuals(hamilton), want_h) and same_systems(residuals(el), want_el)):
                failures.append((kind, "oracle", spec.hamiltonian))
                continue
        if hamilton != el:
            failures.append((kind, "equality", spec.hamiltonian))
    random_count = sum(1 for kind, _ in CORPUS if kind == "random")
    report(
        1,
        not failures,
        f"Hamilton = Euler-Lagrange(L_H) on {len(CORPUS)} Hamiltonians "
        f"({random_count} random, {oracle_checked} also against SymPy); exact; failures={failures[:1]}",
    )


def test_criterion_2_closed_and_contraction_equals_dH():
    not_closed = []
    mismatch = []
    for kind, spec in CORPUS:
        c = spec.chart
        gamma = ham.solve_hamiltonian_connection(spec)
        if not ham.closedness_defect(gamma, c).is_zero:
            not_closed.append((kind, spec.hamiltonian))
        contraction = ham.hamiltonian_connection_contraction(gamma, ham.polysymplectic_form(c))
        if contraction != valued_ext_d(ham.hamiltonian_form(spec)):
            mismatch.append((kind, spec.hamiltonian))
    report(
        2,
        not not_closed and not mismatch,
        f"d(γ_H⌋Ω_Y) = 0 and γ_H⌋Ω_Y = dH on {len(CORPUS)} τ-free Hamiltonians; exact; "
        f"not closed={len(not_closed)}, mismatched={len(mismatch)}",
    )


def test_criterion_3_polysymplectic_relation():
    rng = random.Random(3)
    count = 0
    bad = []
    for n in (1, 2, 3):
        chart = ham.legendre_chart(n, rng.randint(1, 2))
        psis = [Form.d(chart.tau)] + [Form.d(x) for x in chart.base]
        for _ in range(20):
            psi = Form.d(chart.tau) * random_poly(rng, chart.base, 2, 3)
            for x in chart.base:
                psi = psi + Form.d(x) * random_poly(rng, chart.base, 2, 3)
            psis.append(psi)
        theta_y = ham.liouville_form(chart)
        omega_y = ham.polysymplectic_form(chart)
        for psi in psis:
            count += 1
            if valued_ext_d(leg_contract(theta_y, psi)) != leg_contract(omega_y, psi):
                bad.append((n, str(psi)))
    report(
        3,
        not bad,
        f"d(ϑ_Y⌋ψ) = Ω_Y⌋ψ for {count} ψ (dτ, dx^λ and 20 random x-polynomial ψ per n ∈ {{1,2,3}}); "
        f"exact; failures={len(bad)}",
    )


def test_criterion_4_restriction_two_paths():
    rng = random.Random(44)
    total = 0
    bad = []
    for _ in range(25):
        chart = random_legendre_chart(rng)
        spec = random_hamiltonian(rng, chart, tau=True)
        h = random_theta_section(rng, chart)
        hv = h.assignments[chart.tau]
        restricted = ham.restrict_by_section(ham.hamilton_equations(spec), h)
        # oracle first: substitute τ = h inside sympy and redo Hamilton's equations there
        H_sub = sp.expand(to_sympy(spec.hamiltonian).subs(sp.Symbol(chart.tau.name), to_sympy(hv)))
        if not same_systems(residuals(restricted), hamilton_residuals(chart, H_sub)):
            bad.append(("oracle", spec.hamiltonian, hv))
        direct = ham.hamilton_equations(ham.substitute_section(spec, h))
        if restricted != direct:
            bad.append(("two-path", spec.hamiltonian, hv))
        total += 1
    report(
        4,
        not bad,
        f"restrict(Hamilton(𝓗), h) = Hamilton(𝓗|τ=h) on {total} τ-dependent Hamiltonians; exact; "
        f"failures={len(bad)}",
    )


def test_criterion_5_reducibility_iff_integral():
    rng = random.Random(55)
    total = 0
    wrong = []
    no_witness = []
    for k in range(60):
        chart = Chart.build(rng.randint(1, 3), rng.randint(1, 2), 1)
        integral = k % 2 == 0
        h_theta, gamma, h = random_component_tables(rng, chart, integral=integral)
        tau = chart.tau
        hv = to_sympy(h.assignments[tau])
        ts = sp.Symbol(tau.name)
        # oracle: compare (H_λ + H_τ Γ_λ)|τ=h with (H_λ + H_τ ∂_λ h)|τ=h in sympy
        oracle_equal = True
        for y in chart.fibers:
            for x in chart.base:
                a = composite(to_sympy(h_theta[(y, x)]), to_sympy(h_theta[(y, tau)]), to_sympy(gamma[(tau, x)]))
                b = composite(
                    to_sympy(h_theta[(y, x)]), to_sympy(h_theta[(y, tau)]), sp.diff(hv, sp.Symbol(x.name))
                )
                if sp.expand(a.subs(ts, hv) - b.subs(ts, hv)) != 0:
                    oracle_equal = False
        defect = reducibility_defect(h_theta, gamma, h, chart)
        is_int = is_integral_section(h, gamma)
        total += 1
        if is_int != integral or (not defect) != is_int or oracle_equal != is_int:
            wrong.append((k, integral, is_int, bool(defect), oracle_equal))
        if not is_int and not any(not v.is_zero for v in defect.values()):
            no_witness.append(k)
    report(
        5,
        not wrong and not no_witness,
        f"restricted composite = pull-back ⇔ h integral on {total} tables "
        f"({total // 2} integral, {total - total // 2} not, each with a witness component); exact; "
        f"mismatches={len(wrong)}, missing witnesses={len(no_witness)}",
    )


def test_criterion_6_physics():
    parts = {}

    # (a) harmonic oscillator; sympy oracle first
    c = ham.legendre_chart(1, 1).with_parameters("w0")
    spec = ham.HamiltonianSpec(c, make_expr("p^2/2 + w0^2*y^2/2", c.scope()))
    y, p, yx, px, w0 = sp.symbols("y p y_x p_x w0")
    want = [yx - p, px + w0**2 * y]
    got = ham.hamilton_equations(spec)
    parts["a"] = same_systems(hamilton_residuals(c, spec.hamiltonian), want) and same_systems(
        residuals(got), want
    )

    # (b) Klein-Gordon; elimination oracle in sympy first
    c = ham.legendre_chart(2, 1, order=2).with_parameters("mu")
    spec = ham.HamiltonianSpec(c, make_expr("(p[1]^2 - p[2]^2)/2 + mu^2*y^2/2", c.scope()))
    res = hamilton_residuals(c, spec.hamiltonian)
    p1, p2 = sp.symbols("p[1] p[2]")
    sol = sp.solve(res[:2], [p1, p2], dict=True)[0]
    jets = {sp.Symbol("y_1"): sp.Symbol("y_11"), sp.Symbol("y_2"): sp.Symbol("y_22")}
    # p^λ_{,λ} is the λ-derivative of the solved momentum; each is linear in one jet
    div = sum(sp.diff(sol[pk], v) * jets[v] for pk in (p1, p2) for v in jets)
    elim_oracle = sp.expand(div + sp.diff(to_sympy(spec.hamiltonian), sp.Symbol("y")))
    target = sp.Symbol("y_11") - sp.Symbol("y_22") + sp.Symbol("mu") ** 2 * sp.Symbol("y")
    reduced = ham.eliminate_momenta(ham.hamilton_equations(spec), c)
    parts["b"] = same_systems([elim_oracle], [target]) and same_systems(residuals(reduced), [target])

    # (c) Legendre round trip on both Lagrangians; sympy Legendre and EL oracles first
    ok_c = True
    cases = [
        (ham.legendre_chart(1, 1, order=2).with_parameters("w0"), "y_x^2/2 - w0^2*y^2/2"),
        (ham.legendre_chart(2, 1, order=2).with_parameters("mu"), "y_1^2/2 - y_2^2/2 - mu^2*y^2/2"),
    ]
    for chart, text in cases:
        L = make_expr(text, chart.scope())
        spec = ham.legendre_of_lagrangian(L, chart)
        ok_c &= sp.expand(to_sympy(spec.hamiltonian) - legendre(chart, L)) == 0
        el = ham.euler_lagrange(L, chart)
        ok_c &= same_systems(residuals(el), euler_lagrange_residuals(chart, L, chart.fibers))
        ok_c &= ham.eliminate_momenta(ham.hamilton_equations(spec), chart) == el
    parts["c"] = ok_c
    report(
        6,
        all(parts.values()),
        "oscillator {y_x = p, p_x = -w0^2 y}, Klein-Gordon y_11 - y_22 + mu^2 y = 0, Legendre round trips; "
        "exact; " + ", ".join(f"({k}) {'ok' if v else 'FAILED'}" for k, v in parts.items()),
    )


# -- criterion 7: algebraic law suites -------------------------------------------------

N_LAWS = 200


def random_form(rng, coords, degree, coeff_atoms=None, terms=3):
    coeff_atoms = coeff_atoms or coords
    f = Form.zero(degree)
    for _ in range(rng.randint(0, terms)):
        word = rng.sample(coords, degree)
        f = f + Form.d(*word) * random_poly(rng, coeff_atoms, 2, 2)
    return f


def law_d_squared(rng):
    c = ham.legendre_chart(rng.randint(1, 2), 1)
    coords = list(c.base) + [c.tau] + list(c.fibers) + list(c.momenta.values())
    a = random_form(rng, coords, rng.randint(0, 2))
    return ext_d(ext_d(a)).is_zero


def law_graded_leibniz(rng):
    c = ham.legendre_chart(rng.randint(1, 2), 1)
    coords = list(c.base) + [c.tau] + list(c.fibers) + list(c.momenta.values())
    a = random_form(rng, coords, rng.randint(0, 2))
    b = random_form(rng, coords, rng.randint(0, 2))
    return ext_d(wedge(a, b)) == wedge(ext_d(a), b) + wedge(a, ext_d(b)) * (-1) ** a.degree


def law_total_derivatives_commute(rng):
    c = Chart.build(rng.randint(2, 3), rng.randint(1, 2), 3)
    atoms = list(c.base) + [u for y in c.fibers for k in (0, 1) for u in c.jets(y, k)]
    e = random_poly(rng, atoms, 3, 4)
    lam, mu = rng.sample(range(1, c.n + 1), 2)
    return total_derivative(c, lam, total_derivative(c, mu, e)) == total_derivative(
        c, mu, total_derivative(c, lam, e)
    )


def law_contact_annihilation(rng):
    c = Chart.build(rng.randint(1, 2), rng.randint(1, 2), rng.randint(1, 2))
    section = {y: random_poly(rng, c.base, 3, 3) for y in c.fibers}
    return all(prolongation_pullback(c, section, th).is_zero for th in contact_forms(c))


def law_split_exact(rng):
    c = Chart.build(rng.randint(1, 2), rng.randint(1, 2), 2)
    low = list(c.base) + [u for y in c.fibers for k in (0, 1) for u in c.jets(y, k)]
    a = random_form(rng, low, 1, terms=4)
    hor, ver = horizontal_vertical_split(c, a)
    base = set(c.base)
    horizontal_ok = all(set(word) <= base for word in hor.terms)
    # the vertical part is contact, so it dies on any holonomic prolongation
    section = {y: random_poly(rng, c.base, 3, 3) for y in c.fibers}
    vertical_ok = prolongation_pullback(c, section, ver).is_zero
    return hor + ver == a and horizontal_ok and vertical_ok


def law_connection_round_trip(rng):
    c = Chart.build(rng.randint(1, 3), rng.randint(1, 2), 1)
    fib = fibration(c, rng.choice(["Y->X", "Theta->X", "Yh->X"]))
    atoms = list(fib.base) + list(fib.fibers)
    gamma = Connection(fib, {(f, x): random_poly(rng, atoms, 2, 3) for f in fib.fibers for x in fib.base})
    s = connection_to_section(gamma, c)
    return section_to_connection(s, fib, c) == gamma and connection_to_section(
        section_to_connection(s, fib, c), c
    ) == s


LAWS = {
    "d∘d = 0": law_d_squared,
    "graded Leibniz": law_graded_leibniz,
    "[D_λ, D_μ] = 0": law_total_derivatives_commute,
    "contact annihilation": law_contact_annihilation,
    "splitting exactness": law_split_exact,
    "connection↔section": law_connection_round_trip,
}


def test_criterion_7_law_suites():
    counts = {}
    for k, (name, law) in enumerate(LAWS.items()):
        rng = random.Random(7000 + k)
        passed = sum(bool(law(rng)) for _ in range(N_LAWS))
        counts[name] = passed
    ok = all(v == N_LAWS for v in counts.values())
    report(
        7,
        ok,
        f"{len(LAWS)} law suites × {N_LAWS} instances; exact; "
        + ", ".join(f"{k} {v}/{N_LAWS}" for k, v in counts.items()),
    )


def test_criterion_8_cli_goldens():
    mismatched = []
    codes = {}
    env = dict(os.environ)
    for model in ("oscillator", "klein_gordon"):
        path = ROOT / "models" / f"{model}.jh"
        for fmt, ext in (("text", "txt"), ("latex", "tex"), ("json", "json")):
            proc = subprocess.run(
                [sys.executable, "-m", "jetham.cli.main", "derive", str(path), "--format", fmt],
                capture_output=True, env=env, timeout=300,
            )
            golden = (ROOT / "tests" / "golden" / f"{model}.{ext}").read_bytes()
            if proc.returncode != 0 or proc.stdout != golden:
                mismatched.append(f"{model}.{ext}")
        proc = subprocess.run(
            [sys.executable, "-m", "jetham.cli.main", "check", str(path)],
            capture_output=True, env=env, timeout=300,
        )
        codes[model] = proc.returncode
    report(
        8,
        not mismatched and all(v == 0 for v in codes.values()),
        f"6 golden outputs byte-identical (mismatched={mismatched}); `jetham check` exit codes {codes}",
    )
