"""Execute the tasks of a parsed model and collect an :class:`OutputDocument`.

Tasks run in file order against a working chart; ``prolong r`` raises the
jet order for every later task.  Tasks that differentiate a first-order
Lagrangian totally (``euler-lagrange L``, ``hamilton eliminate``) prolong
their own copy of the chart to order 2 explicitly.
"""

from __future__ import annotations

from jetham import ham
from jetham.cli.dsl import ModelFile, TaskDecl
from jetham.cli.emit import OutputDocument, TaskResult
from jetham.errors import DerivationError
from jetham.excalc import Form, form_latex, form_text, valued_ext_d, valued_text
from jetham.geom import (
    composite_connection,
    contact_forms,
    integral_section_defect,
    multi_indices,
    prolong,
    pullback_connection,
    reducibility_defect,
    vertical_covariant_differential,
)
from jetham.symcore.render import coordinate_latex, expr_latex, expr_text


def _contact_label_latex(chart, jet) -> str:
    """``\\vartheta^{y}_{12}`` for the contact form of ``y_12``."""
    fld, _ = chart.jet_of(jet)
    head = coordinate_latex(fld)
    full = coordinate_latex(jet)
    if jet == fld:
        return f"\\vartheta^{{{head}}}"
    return f"\\vartheta^{{{head}}}{full[len(head):]}"


class TaskError(DerivationError):
    """A derivation error annotated with the task that raised it."""

    def __init__(self, task: TaskDecl, cause: Exception):
        self.task = task
        self.cause = cause
        super().__init__(
            f"task '{' '.join((task.name,) + task.args)}' (line {task.pos.line}): {cause}"
        )


def _equations(system) -> dict:
    rows = []
    for eq in system:
        rows.append(
            {
                "label": eq.label,
                "lhs": expr_text(eq.lhs),
                "rhs": expr_text(eq.rhs),
                "latex": f"{expr_latex(eq.lhs)} = {expr_latex(eq.rhs)}",
            }
        )
    return {"equations": rows}


def _connection(gamma) -> dict:
    fib = gamma.fibration
    rows = []
    for f in fib.fibers:
        for x in fib.base:
            v = gamma[(f, x)]
            rows.append(
                {
                    "fiber": f.name,
                    "base": x.name,
                    "text": expr_text(v),
                    "latex": expr_latex(v),
                    "symbol_latex": f"\\Gamma^{{{coordinate_latex(f)}}}_{{{coordinate_latex(x)}}}",
                }
            )
    return {"fibration": fib.name, "components": rows}


def _check(rows) -> dict:
    checks = [{"name": name, "value": bool(ok), "witness": "" if ok else witness} for name, ok, witness in rows]
    return {"value": all(c["value"] for c in checks), "checks": checks}


def _system_witness(a, b) -> str:
    only_a, only_b = a.difference(b)
    parts = [f"left only: {expr_text(e)} = 0" for e in only_a]
    parts += [f"right only: {expr_text(e)} = 0" for e in only_b]
    return "; ".join(parts)


class Runner:
    def __init__(self, model: ModelFile):
        self.model = model
        self.chart = model.chart

    # -- helpers --------------------------------------------------------------

    def spec(self):
        return ham.HamiltonianSpec(self.chart, self.model.hamiltonian.expr)

    def second_order(self):
        return self.chart if self.chart.order >= 2 else prolong(self.chart, 2)

    def lagrangian(self, name):
        return self.model.lagrangians[name].expr

    def section(self, name):
        return self.model.sections[name].section

    def connection(self, name):
        return self.model.connections[name].connection

    # -- tasks ----------------------------------------------------------------

    def run(self, task: TaskDecl) -> TaskResult:
        handler = getattr(self, "task_" + task.name.replace("-", "_"))
        try:
            kind, payload = handler(*task.args)
        except TaskError:
            raise
        except DerivationError as exc:
            raise TaskError(task, exc) from exc
        return TaskResult(" ".join((task.name,) + task.args), kind, payload)

    def task_prolong(self, order):
        self.chart = prolong(self.chart, int(order))
        rows = []
        for y in self.chart.fibers:
            for k in range(0, self.chart.order + 1):
                for alpha in multi_indices(self.chart.n, k):
                    c = self.chart.jet(y, alpha)
                    rows.append({"name": c.name, "role": c.role, "latex": coordinate_latex(c)})
        return "coordinates", {"order": self.chart.order, "coordinates": rows}

    def task_hamilton(self, option=None):
        system = ham.hamilton_equations(self.spec())
        if option == "eliminate":
            system = ham.eliminate_momenta(system, self.second_order())
        return "equations", _equations(system)

    def task_euler_lagrange(self, name=None):
        if name is None:
            spec = self.spec()
            chart = self.chart
            fields = chart.fibers + tuple(chart.momenta.values())
            system = ham.euler_lagrange(ham.lagrangian_LH(spec), chart, fields)
        else:
            system = ham.euler_lagrange(self.lagrangian(name), self.second_order())
        return "equations", _equations(system)

    def task_check_closed(self):
        spec = self.spec()
        gamma = ham.solve_hamiltonian_connection(spec)
        defect = ham.closedness_defect(gamma, self.chart)
        contraction = ham.hamiltonian_connection_contraction(gamma, ham.polysymplectic_form(self.chart))
        dh = valued_ext_d(ham.hamiltonian_form(spec))
        gap = contraction - dh
        return "check", _check(
            [
                ("γ_H ⌋ Ω_Y is closed", defect.is_zero, valued_text(defect)),
                ("γ_H ⌋ Ω_Y = dH", gap.is_zero, valued_text(gap)),
            ]
        )

    def task_restrict(self, h, sigma=None):
        system = ham.hamilton_equations(self.spec())
        out = ham.restrict_by_section(
            system, self.section(h), self.section(sigma) if sigma else None, self.chart
        )
        return "equations", _equations(out)

    def task_legendre(self, name):
        spec = ham.legendre_of_lagrangian(self.lagrangian(name), self.chart)
        return "expression", {
            "name": "H",
            "name_latex": "\\mathcal{H}",
            "text": expr_text(spec.hamiltonian),
            "latex": expr_latex(spec.hamiltonian),
        }

    def task_contact_forms(self):
        # contact_forms enumerates fibers, then orders, then multi-indices
        jets = [
            self.chart.jet(y, alpha)
            for y in self.chart.fibers
            for order in range(self.chart.order)
            for alpha in multi_indices(self.chart.n, order)
        ]
        out = []
        for c, form in zip(jets, contact_forms(self.chart)):
            out.append(
                {
                    "label": f"theta[{c.name}]",
                    "label_latex": _contact_label_latex(self.chart, c),
                    "text": form_text(form),
                    "latex": form_latex(form),
                }
            )
        return "forms", {"forms": out}

    def task_composite_connection(self, h_theta, gamma):
        return "connection", _connection(
            composite_connection(self.connection(h_theta), self.connection(gamma), self.chart)
        )

    def task_pullback_connection(self, h_theta, h):
        return "connection", _connection(
            pullback_connection(self.connection(h_theta), self.section(h), self.chart)
        )

    def task_vertical_differential(self, h_theta):
        delta = vertical_covariant_differential(self.connection(h_theta), self.chart)
        out = []
        for y, form in delta.forms().items():
            out.append(
                {
                    "label": f"Delta[{y.name}]",
                    "label_latex": f"\\Delta^{{{coordinate_latex(y)}}}",
                    "text": form_text(form),
                    "latex": form_latex(form),
                }
            )
        return "forms", {"forms": out}


def run_tasks(model: ModelFile) -> OutputDocument:
    runner = Runner(model)
    return OutputDocument([runner.run(t) for t in model.tasks])


# ---------------------------------------------------------------------------
# property checks behind ``jetham check``


def _hamiltonian_checks(model: ModelFile):
    chart = model.chart
    spec = ham.HamiltonianSpec(chart, model.hamiltonian.expr)
    rows = []
    fields = chart.fibers + tuple(chart.momenta.values())
    hamilton = ham.hamilton_equations(spec)
    el = ham.euler_lagrange(ham.lagrangian_LH(spec), chart, fields)
    rows.append(("Hamilton equations = Euler–Lagrange equations of L_H", hamilton == el,
                 _system_witness(hamilton, el)))
    gamma = ham.solve_hamiltonian_connection(spec)
    defect = ham.closedness_defect(gamma, chart)
    rows.append(("γ_H ⌋ Ω_Y is closed", defect.is_zero, valued_text(defect)))
    gap = ham.hamiltonian_connection_contraction(gamma, ham.polysymplectic_form(chart)) - valued_ext_d(
        ham.hamiltonian_form(spec)
    )
    rows.append(("γ_H ⌋ Ω_Y = dH", gap.is_zero, valued_text(gap)))
    for c in (chart.tau,) + chart.base:
        lhs, rhs = ham.polysymplectic_relation(chart, Form.d(c))
        rows.append((f"d(ϑ_Y ⌋ d{c.name}) = Ω_Y ⌋ d{c.name}", lhs == rhs, valued_text(lhs - rhs)))
    for name, decl in model.sections.items():
        if decl.section.fibration.name != "Theta->X":
            continue
        restricted = ham.restrict_by_section(hamilton, decl.section, None, chart)
        direct = ham.hamilton_equations(ham.substitute_section(spec, decl.section))
        direct = ham.restrict_by_section(direct, decl.section, None, chart)
        rows.append((f"restriction by {name} = Hamilton equations of H|{name}", restricted == direct,
                     _system_witness(restricted, direct)))
    return rows


def _lagrangian_checks(model: ModelFile):
    rows = []
    chart = model.chart
    second = chart if chart.order >= 2 else prolong(chart, 2)
    for name, decl in model.lagrangians.items():
        el = ham.euler_lagrange(decl.expr, second)
        spec = ham.legendre_of_lagrangian(decl.expr, chart)
        back = ham.eliminate_momenta(ham.hamilton_equations(spec.with_chart(second)), second)
        rows.append((f"Legendre round trip of {name} reproduces its Euler–Lagrange equations",
                     el == back, _system_witness(el, back)))
    return rows


def _reducibility_checks(model: ModelFile):
    rows = []
    chart = model.chart
    conns = model.connections
    h_thetas = [n for n, d in conns.items() if d.connection.fibration.name == "Y->Theta"]
    gammas = [n for n, d in conns.items() if d.connection.fibration.name == "Theta->X"]
    sections = [n for n, d in model.sections.items() if d.section.fibration.name == "Theta->X"]
    for a in h_thetas:
        for g in gammas:
            for s in sections:
                h = model.sections[s].section
                defect = reducibility_defect(conns[a].connection, conns[g].connection, h, chart)
                integral = not integral_section_defect(h, conns[g].connection)
                ok = integral == (not defect)
                witness = "; ".join(f"{f.name}/{x.name}: {expr_text(v)}" for (f, x), v in defect.items())
                rows.append((f"{a}∘{g} restricted to {s} = pull-back iff {s} is integral for {g}",
                             ok, witness))
    return rows


def check_model(model: ModelFile) -> OutputDocument:
    """Run every property check that applies to the declared blocks."""
    doc = OutputDocument()
    groups = []
    if model.hamiltonian is not None:
        groups.append(("hamiltonian", _hamiltonian_checks))
    if model.lagrangians:
        groups.append(("lagrangians", _lagrangian_checks))
    groups.append(("composite connections", _reducibility_checks))
    for name, fn in groups:
        try:
            rows = fn(model)
        except DerivationError as exc:
            raise DerivationError(f"check '{name}': {exc}") from exc
        if rows:
            doc.tasks.append(TaskResult(f"check {name}", "check", _check(rows)))
    return doc

