"""Reader for ``.jh`` model files.

A model file is a sequence of blocks.  Each block has a header line ending in
``{`` and a body of newline separated statements closed by ``}``; a block may
also sit on one line (``section h { tau = x }``).  ``#`` starts a comment.

::

    bundle {
      base = x            # or: n = 2   (names x1, x2)
      fiber = y           # or: m = 2   (names y1, y2)
      theta = tau
      momentum = p
      order = 1
    }
    hamiltonian {
      parameter w0
      function V(y)
      H = p^2/2 + w0^2*y^2/2 + V
    }
    lagrangian L { L = y_x^2/2 }
    section h on Theta->X { tau = x^2 }
    section sigma on Y->Theta { y = x*tau }
    connection G on Theta->X { (tau, x) = 2*x }
    tasks {
      hamilton
      restrict h sigma
    }

Parsing runs in two passes: declarations (chart, parameters, functions) are
collected first so expressions may use names declared later in the file.
Every error is a :class:`ParseError` with a line, a column and a hint.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from jetham.errors import ArityError, DerivationError, ParseError, UnknownNameError
from jetham.geom import FIBRATIONS, Chart, Connection, SectionSpec, fibration
from jetham.symcore.parse import parse_expr

IDENT = re.compile(r"[A-Za-z][A-Za-z0-9]*\Z")
_HEADER = re.compile(
    r"(?P<kind>[A-Za-z][A-Za-z-]*)(?:\s+(?P<name>[A-Za-z][A-Za-z0-9]*))?"
    r"(?:\s+on\s+(?P<fib>\S+))?\s*\Z"
)
_ASSIGN = re.compile(r"(?P<lhs>[^=]+?)\s*=(?P<rhs>.*)\Z")
_FUNCTION = re.compile(r"function\s+(?P<name>[A-Za-z][A-Za-z0-9]*)\s*\((?P<args>[^)]*)\)\s*\Z")
_PAIR = re.compile(r"\(\s*(?P<f>[^,\s]+)\s*,\s*(?P<b>[^)\s]+)\s*\)\s*\Z")

BLOCKS = ("bundle", "hamiltonian", "lagrangian", "section", "connection", "parameters", "tasks")

# desk-scale caps on chart sizes
_LIMITS = {"n": (1, 9), "m": (1, 9), "order": (0, 8)}

# task name -> (min args, max args)
TASKS = {
    "prolong": (1, 1),
    "hamilton": (0, 1),
    "euler-lagrange": (0, 1),
    "check-closed": (0, 0),
    "restrict": (1, 2),
    "legendre": (1, 1),
    "contact-forms": (0, 0),
    "composite-connection": (2, 2),
    "pullback-connection": (2, 2),
    "vertical-differential": (1, 1),
}


@dataclass(frozen=True)
class Pos:
    line: int
    column: int


@dataclass
class Statement:
    text: str
    pos: Pos


@dataclass
class Block:
    kind: str
    name: str | None
    fib: str | None
    pos: Pos
    body: list = field(default_factory=list)


@dataclass(frozen=True)
class TaskDecl:
    name: str
    args: tuple
    pos: Pos


@dataclass(frozen=True)
class ExprDecl:
    name: str
    expr: object
    source: str
    pos: Pos


@dataclass(frozen=True)
class SectionDecl:
    name: str
    section: SectionSpec
    pos: Pos


@dataclass(frozen=True)
class ConnectionDecl:
    name: str
    connection: Connection
    pos: Pos


@dataclass
class ModelFile:
    chart: Chart
    hamiltonian: ExprDecl | None = None
    lagrangians: dict = field(default_factory=dict)
    sections: dict = field(default_factory=dict)
    connections: dict = field(default_factory=dict)
    tasks: list = field(default_factory=list)


def _error(message, pos: Pos, hint="", cls=ParseError):
    return cls(message, pos.line, pos.column, hint)


# ---------------------------------------------------------------------------
# pass 0: blocks and statements


def _segments(text: str):
    """Yield ``(kind, text, Pos)`` with kind in {"text", "{", "}"}."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        start = 0
        for k, ch in enumerate(line + "\n"):
            if ch in "{}\n":
                chunk = line[start:k]
                stripped = chunk.strip()
                if stripped:
                    col = start + len(chunk) - len(chunk.lstrip()) + 1
                    yield "text", stripped, Pos(lineno, col)
                if ch != "\n":
                    yield ch, ch, Pos(lineno, k + 1)
                start = k + 1


def read_blocks(text: str) -> list:
    blocks = []
    current = None
    pending = None
    for kind, value, pos in _segments(text):
        if current is None:
            if kind == "text":
                if pending is not None:
                    raise _error(f"expected '{{' after {pending.text!r}", pos, "open the block with '{'")
                pending = Statement(value, pos)
            elif kind == "{":
                if pending is None:
                    raise _error("block without a header", pos, "write e.g. 'bundle {'")
                m = _HEADER.match(pending.text)
                if not m:
                    raise _error(
                        f"malformed block header {pending.text!r}",
                        pending.pos,
                        "headers look like 'section h on Theta->X {'",
                    )
                if m["kind"] not in BLOCKS:
                    raise _error(
                        f"unknown block {m['kind']!r}",
                        pending.pos,
                        f"blocks are {', '.join(BLOCKS)}",
                    )
                current = Block(m["kind"], m["name"], m["fib"], pending.pos)
                pending = None
            else:
                raise _error("unmatched '}'", pos, "remove it or open a block before it")
        else:
            if kind == "text":
                current.body.append(Statement(value, pos))
            elif kind == "}":
                blocks.append(current)
                current = None
            else:
                raise _error("blocks do not nest", pos, "close the current block with '}' first")
    if pending is not None:
        raise _error(f"expected '{{' after {pending.text!r}", pending.pos, "open the block with '{'")
    if current is not None:
        raise _error(f"block {current.kind!r} is never closed", current.pos, "add a closing '}'")
    return blocks


# ---------------------------------------------------------------------------
# pass 1: declarations


def _names(raw: str, pos: Pos) -> tuple:
    out = tuple(s.strip() for s in raw.split(","))
    for s in out:
        if not IDENT.match(s):
            raise _error(
                f"invalid name {s!r}",
                pos,
                "names are a letter followed by letters or digits (no underscores)",
            )
    return out


def _int(raw: str, pos: Pos, what: str) -> int:
    try:
        v = int(raw)
    except ValueError:
        raise _error(f"{what} must be an integer, got {raw!r}", pos) from None
    lo, hi = _LIMITS.get(what, (0, 8))
    if not lo <= v <= hi:
        raise _error(f"{what} = {v} is out of range", pos, f"allowed values are {lo} to {hi}")
    return v


def _build_chart(bundle: Block | None) -> Chart:
    opts = {}
    if bundle is not None:
        for st in bundle.body:
            m = _ASSIGN.match(st.text)
            if not m:
                raise _error(f"expected 'key = value', got {st.text!r}", st.pos)
            key, val = m["lhs"].strip(), m["rhs"].strip()
            if key in opts:
                raise _error(f"{key!r} given twice", st.pos)
            if key in ("n", "m", "order"):
                opts[key] = (_int(val, st.pos, key), st.pos)
            elif key in ("base", "fiber", "fibers"):
                opts["fiber" if key == "fibers" else key] = (_names(val, st.pos), st.pos)
            elif key in ("theta", "momentum"):
                opts[key] = (_names(val, st.pos)[0], st.pos)
            else:
                raise _error(
                    f"unknown bundle key {key!r}",
                    st.pos,
                    "keys are n, m, order, base, fiber, theta, momentum",
                )
    base = opts.get("base", (None,))[0]
    fibers = opts.get("fiber", (None,))[0]
    for key, names in (("n", base), ("m", fibers)):
        if key in opts and names is not None and len(names) != opts[key][0]:
            raise _error(f"{key} = {opts[key][0]} but {len(names)} name(s) were listed", opts[key][1])
    n = len(base) if base else opts.get("n", (1,))[0]
    m = len(fibers) if fibers else opts.get("m", (1,))[0]
    try:
        return Chart.build(
            n,
            m,
            opts.get("order", (1,))[0],
            base=base,
            fibers=fibers,
            theta=opts.get("theta", ("tau",))[0],
            momenta=True,
            momentum=opts.get("momentum", ("p",))[0],
        )
    except ValueError as exc:
        pos = bundle.pos if bundle is not None else Pos(1, 1)
        raise _error(str(exc), pos, "rename the clashing coordinates") from None


def _declarations(blocks):
    """Parameters and function signatures declared anywhere in the file."""
    params = []
    functions = []
    for b in blocks:
        if b.kind in ("bundle", "tasks"):
            continue
        keep = []
        for st in b.body:
            if st.text.startswith("parameter ") or st.text.startswith("parameters "):
                raw = st.text.split(None, 1)[1]
                for nm in _names(raw, st.pos):
                    if nm not in params:
                        params.append(nm)
            elif st.text.startswith("function"):
                m = _FUNCTION.match(st.text)
                if not m:
                    raise _error(
                        f"malformed function declaration {st.text!r}",
                        st.pos,
                        "write e.g. 'function V(x, y)'",
                    )
                args = _names(m["args"], st.pos) if m["args"].strip() else ()
                functions.append((m["name"], args, st.pos))
            elif b.kind == "parameters":
                for nm in _names(st.text, st.pos):
                    if nm not in params:
                        params.append(nm)
            else:
                keep.append(st)
        b.body = keep
    return params, functions


# ---------------------------------------------------------------------------
# pass 2: expressions and semantic checks


def _expr(text: str, pos: Pos, scope):
    return parse_expr(text, scope, line=pos.line, column=pos.column)


def _rhs(st: Statement, scope):
    m = _ASSIGN.match(st.text)
    if not m:
        raise _error(f"expected 'name = expression', got {st.text!r}", st.pos)
    offset = st.text.index("=", len(m["lhs"])) + 1
    rhs = m["rhs"]
    lead = len(rhs) - len(rhs.lstrip())
    if not rhs.strip():
        raise _error("missing expression after '='", Pos(st.pos.line, st.pos.column + offset))
    where = Pos(st.pos.line, st.pos.column + offset + lead)
    return m["lhs"].strip(), rhs.strip(), _expr(rhs.strip(), where, scope)


def _single_definition(b: Block, expected: str, scope) -> ExprDecl:
    if len(b.body) != 1:
        at = b.body[1].pos if len(b.body) > 1 else b.pos
        raise _error(
            f"block {b.kind!r} needs exactly one definition",
            at,
            f"write '{expected} = <expression>'",
        )
    st = b.body[0]
    lhs, source, e = _rhs(st, scope)
    if lhs != expected:
        raise _error(f"expected {expected!r} on the left, got {lhs!r}", st.pos, f"write '{expected} = ...'")
    return ExprDecl(expected, e, source, st.pos)


def _fibration(b: Block, chart: Chart, default: str):
    name = b.fib or default
    if name not in FIBRATIONS:
        raise _error(f"unknown fibration {name!r}", b.pos, f"use one of {', '.join(FIBRATIONS)}")
    try:
        return fibration(chart, name)
    except DerivationError as exc:
        raise _error(str(exc), b.pos) from None


def _section(b: Block, chart: Chart, scope) -> SectionDecl:
    assigned = {}
    for st in b.body:
        lhs, _, e = _rhs(st, scope)
        c = chart.lookup(lhs)
        if c is None:
            raise _error(f"unknown coordinate {lhs!r}", st.pos, cls=UnknownNameError)
        if c in assigned:
            raise _error(f"{lhs} is assigned twice", st.pos)
        assigned[c] = (e, st.pos)
    default = "Theta->X" if chart.tau in assigned else "Y->Theta"
    fib = _fibration(b, chart, default)
    for c, (_, pos) in assigned.items():
        if c not in fib.fibers:
            raise _error(
                f"{c.name} is not a fiber coordinate of {fib.name}",
                pos,
                f"assign {', '.join(f.name for f in fib.fibers)}",
            )
    missing = [f.name for f in fib.fibers if f not in assigned]
    if missing:
        raise _error(f"section {b.name} leaves {', '.join(missing)} unassigned", b.pos)
    for c, (e, pos) in assigned.items():
        bad = sorted(
            x.name for x in e.coordinates() if x not in fib.base and x.role != "parameter"
        )
        if bad:
            raise _error(
                f"section value for {c.name} depends on {', '.join(bad)}",
                pos,
                f"a section of {fib.name} may only use {', '.join(x.name for x in fib.base)}",
            )
    section = SectionSpec(fib, {c: e for c, (e, _) in assigned.items()})
    return SectionDecl(b.name, section, b.pos)


def _connection(b: Block, chart: Chart, scope) -> ConnectionDecl:
    if b.fib is None:
        raise _error(
            f"connection {b.name} needs a fibration",
            b.pos,
            "write e.g. 'connection H on Y->Theta {'",
        )
    fib = _fibration(b, chart, b.fib)
    table = {}
    for st in b.body:
        lhs, _, e = _rhs(st, scope)
        m = _PAIR.match(lhs)
        if not m:
            raise _error(f"expected '(fiber, base)' on the left, got {lhs!r}", st.pos)
        f, x = chart.lookup(m["f"]), chart.lookup(m["b"])
        if f not in fib.fibers or x not in fib.base:
            raise _error(
                f"({m['f']}, {m['b']}) is not a fiber × base pair of {fib.name}",
                st.pos,
                f"fibers: {', '.join(c.name for c in fib.fibers)}; "
                f"base: {', '.join(c.name for c in fib.base)}",
            )
        if (f, x) in table:
            raise _error(f"component ({m['f']}, {m['b']}) given twice", st.pos)
        table[(f, x)] = e
    return ConnectionDecl(b.name, Connection(fib, table), b.pos)


def _task(st: Statement) -> TaskDecl:
    words = st.text.split()
    name, args = words[0], tuple(words[1:])
    if name not in TASKS:
        raise _error(f"unknown task {name!r}", st.pos, f"tasks are {', '.join(TASKS)}")
    lo, hi = TASKS[name]
    if not lo <= len(args) <= hi:
        want = str(lo) if lo == hi else f"{lo} to {hi}"
        raise _error(f"task {name} takes {want} argument(s), got {len(args)}", st.pos, cls=ArityError)
    return TaskDecl(name, args, st.pos)


def _check_task(t: TaskDecl, model: ModelFile):
    def need(kind, table, arg, fib=None):
        if arg not in table:
            raise _error(f"task {t.name} refers to undeclared {kind} {arg!r}", t.pos, f"declare a {kind} block named {arg}")
        if fib is not None:
            decl = table[arg]
            got = (decl.section if kind == "section" else decl.connection).fibration.name
            if got != fib:
                raise _error(f"{kind} {arg} lives on {got}, task {t.name} needs {fib}", t.pos)

    a = t.args
    if t.name == "prolong":
        r = _int(a[0], t.pos, "prolongation order")
        if r < model.chart.order:
            raise _error(f"cannot prolong to order {r} below the bundle order {model.chart.order}", t.pos)
    elif t.name == "hamilton" and a and a[0] != "eliminate":
        raise _error(f"unknown option {a[0]!r}", t.pos, "the only option is 'eliminate'")
    elif t.name in ("euler-lagrange", "legendre") and a:
        need("lagrangian", model.lagrangians, a[0])
    elif t.name == "restrict":
        need("section", model.sections, a[0], "Theta->X")
        if len(a) > 1:
            need("section", model.sections, a[1], "Y->Theta")
    elif t.name == "composite-connection":
        need("connection", model.connections, a[0], "Y->Theta")
        need("connection", model.connections, a[1], "Theta->X")
    elif t.name == "pullback-connection":
        need("connection", model.connections, a[0], "Y->Theta")
        need("section", model.sections, a[1], "Theta->X")
    elif t.name == "vertical-differential":
        need("connection", model.connections, a[0], "Y->Theta")
    if t.name in ("hamilton", "check-closed", "restrict") or (t.name == "euler-lagrange" and not a):
        if model.hamiltonian is None:
            raise _error(f"task {t.name} needs a hamiltonian block", t.pos)


def parse_model(text: str) -> ModelFile:
    """Parse and check a model file; raise a positioned :class:`ParseError`."""
    blocks = read_blocks(text)
    seen = {}
    for b in blocks:
        if b.kind in ("bundle", "hamiltonian", "tasks"):
            if b.kind in seen:
                raise _error(f"second {b.kind} block", b.pos, f"merge it into the one at line {seen[b.kind].line}")
            seen[b.kind] = b.pos
            if b.name is not None or b.fib is not None:
                raise _error(f"block {b.kind!r} takes no name", b.pos)
        elif b.kind in ("lagrangian", "section", "connection") and b.name is None:
            raise _error(f"block {b.kind!r} needs a name", b.pos, f"write e.g. '{b.kind} A {{'")
    chart = _build_chart(next((b for b in blocks if b.kind == "bundle"), None))
    params, functions = _declarations(blocks)
    taken = {c.name for c in chart.coordinates}
    for nm in params:
        if nm in taken:
            pos = next(b.pos for b in blocks if b.kind not in ("bundle", "tasks"))
            raise _error(f"parameter {nm!r} clashes with a coordinate", pos, "rename the parameter")
    chart = chart.with_parameters(*params)
    for name, args, pos in functions:
        if chart.lookup(name) is not None:
            raise _error(f"function {name!r} clashes with an existing name", pos)
        for a in args:
            c = chart.lookup(a)
            if c is None or c.role not in ("base", "theta-fiber", "y-fiber", "momentum"):
                raise _error(
                    f"function argument {a!r} is not a coordinate",
                    pos,
                    "arguments are base, theta, fiber or momentum coordinates",
                    UnknownNameError,
                )
        chart = chart.with_function(name, args)
    scope = chart.scope()

    model = ModelFile(chart)
    names = {}
    for b in blocks:
        if b.kind in ("lagrangian", "section", "connection"):
            if b.name in names:
                raise _error(f"name {b.name!r} is already used", b.pos, f"first declared at line {names[b.name].line}")
            if chart.lookup(b.name) is not None:
                raise _error(f"block name {b.name!r} clashes with a coordinate or parameter", b.pos)
            names[b.name] = b.pos
        if b.kind == "hamiltonian":
            model.hamiltonian = _single_definition(b, "H", scope)
            bad = sorted(
                c.name
                for c in model.hamiltonian.expr.coordinates()
                if c.role in ("jet", "theta-jet", "momentum-jet")
            )
            if bad:
                raise _error(
                    f"the Hamiltonian may not depend on jet coordinates ({', '.join(bad)})",
                    model.hamiltonian.pos,
                    "use x, tau, y, p and parameters",
                )
        elif b.kind == "lagrangian":
            model.lagrangians[b.name] = _single_definition(b, b.name, scope)
        elif b.kind == "section":
            model.sections[b.name] = _section(b, chart, scope)
        elif b.kind == "connection":
            model.connections[b.name] = _connection(b, chart, scope)
        elif b.kind == "tasks":
            model.tasks = [_task(st) for st in b.body]
    for t in model.tasks:
        _check_task(t, model)
    return model
