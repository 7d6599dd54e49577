"""Output documents and their text, LaTeX and JSON renderings.

A document is plain data: every payload holds strings, numbers, booleans,
lists and dicts only, so the JSON form round-trips exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

SCHEMA_VERSION = 1
FORMATS = ("text", "latex", "json")


@dataclass
class TaskResult:
    name: str
    kind: str
    payload: dict


@dataclass
class OutputDocument:
    tasks: list = field(default_factory=list)
    version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "tasks": [{"name": t.name, "kind": t.kind, "payload": t.payload} for t in self.tasks],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "OutputDocument":
        if not isinstance(data, dict) or "tasks" not in data:
            raise ValueError("not an output document: missing 'tasks'")
        version = data.get("version")
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported document version {version!r}")
        tasks = [TaskResult(t["name"], t["kind"], t["payload"]) for t in data["tasks"]]
        return cls(tasks, version)

    @classmethod
    def from_json(cls, text: str) -> "OutputDocument":
        return cls.from_dict(json.loads(text))

    @property
    def ok(self) -> bool:
        """False when any check in the document failed."""
        return all(t.payload.get("value", True) for t in self.tasks if t.kind == "check")


# ---------------------------------------------------------------------------
# text


def _aligned(rows, indent="  "):
    """``lhs = rhs`` rows with the ``=`` signs in one column."""
    if not rows:
        return [indent + "(none)"]
    width = max(len(lhs) for lhs, _ in rows)
    return [f"{indent}{lhs.ljust(width)} = {rhs}" for lhs, rhs in rows]


def _text_body(t: TaskResult):
    p = t.payload
    if t.kind == "equations":
        return _aligned([(e["lhs"], e["rhs"]) for e in p["equations"]])
    if t.kind == "coordinates":
        lines = [f"  order {p['order']}: {len(p['coordinates'])} coordinates"]
        lines += [f"  {c['name']}  ({c['role']})" for c in p["coordinates"]]
        return lines
    if t.kind == "expression":
        return _aligned([(p["name"], p["text"])])
    if t.kind == "forms":
        return _aligned([(f["label"], f["text"]) for f in p["forms"]])
    if t.kind == "connection":
        lines = [f"  on {p['fibration']}"]
        lines += _aligned([(f"{c['fiber']}/{c['base']}", c["text"]) for c in p["components"]])
        return lines
    if t.kind == "check":
        lines = []
        for c in p["checks"]:
            lines.append(f"  {'PASS' if c['value'] else 'FAIL'}  {c['name']}")
            if c["witness"]:
                lines.append(f"        witness: {c['witness']}")
        return lines
    raise ValueError(f"unknown result kind {t.kind!r}")


def emit_text(doc: OutputDocument) -> str:
    out = []
    for t in doc.tasks:
        out.append(f"== {t.name} ==")
        out.extend(_text_body(t))
        out.append("")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# LaTeX


_TEXT_ESCAPES = {
    "\\": "\\textbackslash{}",
    "_": "\\_",
    "&": "\\&",
    "#": "\\#",
    "%": "\\%",
    "{": "\\{",
    "}": "\\}",
    "γ": "$\\gamma$",
    "Ω": "$\\Omega$",
    "ϑ": "$\\vartheta$",
    "⌋": "$\\rfloor$",
    "∘": "$\\circ$",
    "–": "--",
    "|": "$|$",
}


def _latex_escape(s: str) -> str:
    """Make a check name safe inside ``\\text{...}``."""
    return "".join(_TEXT_ESCAPES.get(ch, ch) for ch in s)


def _gather(lines):
    if not lines:
        return ["\\text{(none)}"]
    return [line + (" \\\\" if k < len(lines) - 1 else "") for k, line in enumerate(lines)]


def _latex_lines(t: TaskResult):
    p = t.payload
    if t.kind == "equations":
        return [e["latex"] for e in p["equations"]]
    if t.kind == "coordinates":
        return [", ".join(c["latex"] for c in p["coordinates"])]
    if t.kind == "expression":
        return [f"{p['name_latex']} = {p['latex']}"]
    if t.kind == "forms":
        return [f"{f['label_latex']} = {f['latex']}" for f in p["forms"]]
    if t.kind == "connection":
        return [f"{c['symbol_latex']} = {c['latex']}" for c in p["components"]]
    if t.kind == "check":
        return [
            f"\\text{{{'pass' if c['value'] else 'fail'}: {_latex_escape(c['name'])}}}"
            for c in p["checks"]
        ]
    raise ValueError(f"unknown result kind {t.kind!r}")


def emit_latex(doc: OutputDocument) -> str:
    """A fragment for a document loading ``amsmath``."""
    out = []
    for t in doc.tasks:
        out.append(f"% {t.name}")
        out.append("\\begin{gather*}")
        out.extend(_gather(_latex_lines(t)))
        out.append("\\end{gather*}")
    return "\n".join(out) + ("\n" if out else "")


# ---------------------------------------------------------------------------
# JSON


def emit_json(doc: OutputDocument) -> str:
    return json.dumps(doc.to_dict(), indent=2, ensure_ascii=False) + "\n"


def emit(doc: OutputDocument, fmt: str = "text") -> str:
    if fmt == "text":
        return emit_text(doc)
    if fmt == "latex":
        return emit_latex(doc)
    if fmt == "json":
        return emit_json(doc)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
