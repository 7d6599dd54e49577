"""Named systems of polynomial equations."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from jetham.symcore.expr import Expr, as_expr


@dataclass(frozen=True)
class Equation:
    label: str
    lhs: Expr
    rhs: Expr

    @property
    def residual(self) -> Expr:
        return self.lhs - self.rhs

    def normalized(self) -> Expr:
        """``lhs − rhs`` scaled to a monic leading term; equations differing by a
        nonzero constant factor normalize identically."""
        return self.residual.monic()

    def subst(self, bindings) -> "Equation":
        return Equation(self.label, self.lhs.subst(bindings), self.rhs.subst(bindings))


@dataclass(frozen=True)
class EquationSystem:
    """Ordered equations; equality ignores labels, order and constant factors."""

    equations: tuple
    chart: object = field(default=None, compare=False, repr=False)

    @classmethod
    def of(cls, rows, chart=None) -> "EquationSystem":
        return cls(
            tuple(Equation(label, as_expr(lhs), as_expr(rhs)) for label, lhs, rhs in rows),
            chart,
        )

    def __iter__(self):
        return iter(self.equations)

    def __len__(self):
        return len(self.equations)

    def __getitem__(self, k):
        return self.equations[k]

    def canonical(self) -> Counter:
        return Counter(eq.normalized() for eq in self.equations)

    def __eq__(self, other):
        if not isinstance(other, EquationSystem):
            return NotImplemented
        return self.canonical() == other.canonical()

    def __hash__(self):
        return hash(frozenset(self.canonical().items()))

    def difference(self, other: "EquationSystem"):
        """Residuals present in one system but not the other: ``(only_self, only_other)``."""
        a = self.canonical()
        b = other.canonical()
        return list((a - b).elements()), list((b - a).elements())

    def subst(self, bindings) -> "EquationSystem":
        return EquationSystem(tuple(eq.subst(bindings) for eq in self.equations), self.chart)

    def by_label(self, label: str) -> Equation:
        for eq in self.equations:
            if eq.label == label:
                return eq
        raise KeyError(label)

    def __str__(self):
        return "\n".join(f"{eq.lhs} = {eq.rhs}" for eq in self.equations)
