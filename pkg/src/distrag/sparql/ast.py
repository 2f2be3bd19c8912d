"""Query AST and a canonical printer."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return "?" + self.name


@dataclass(frozen=True, order=True)
class IRI:
    value: str

    def __str__(self):
        return f"<{self.value}>"


@dataclass(frozen=True, order=True)
class BNode:
    label: str

    def __str__(self):
        return "_:" + self.label


Term = Union[Var, IRI, BNode, int]


@dataclass(frozen=True)
class TriplePattern:
    s: Term
    p: Term
    o: Term

    def __str__(self):
        return f"{_term(self.s)} {_term(self.p)} {_term(self.o)} ."


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"

    def __str__(self):
        return f"({_expr(self.left)} {self.op} {_expr(self.right)})"


@dataclass(frozen=True)
class Abs:
    arg: "Expr"

    def __str__(self):
        return f"ABS({_expr(self.arg)})"


Expr = Union[Var, int, IRI, BinOp, Abs]


@dataclass(frozen=True)
class OrderBy:
    expr: Expr
    descending: bool = False

    def __str__(self):
        return f"{'DESC' if self.descending else 'ASC'}({_expr(self.expr)})"


@dataclass(frozen=True)
class Query:
    prefixes: tuple  # ((prefix, iri), ...) in declaration order
    select: Optional[tuple]  # variable names, or None for SELECT *
    patterns: tuple
    filters: tuple = ()
    order_by: Optional[OrderBy] = None
    limit: Optional[int] = None

    @property
    def prefix_map(self) -> dict:
        return dict(self.prefixes)

    def named_variables(self) -> list[str]:
        """Pattern variables in order of first appearance."""
        seen = []
        for pat in self.patterns:
            for t in (pat.s, pat.p, pat.o):
                if isinstance(t, Var) and t.name not in seen:
                    seen.append(t.name)
        return seen

    @property
    def columns(self) -> list[str]:
        return list(self.select) if self.select is not None else self.named_variables()

    def __str__(self):
        return print_query(self)


def _term(t) -> str:
    return str(t)


def _expr(e) -> str:
    return str(e)


def print_query(q: Query) -> str:
    lines = [f"PREFIX {p}: <{iri}>" for p, iri in q.prefixes]
    proj = "*" if q.select is None else " ".join("?" + v for v in q.select)
    lines.append(f"SELECT {proj}")
    lines.append("WHERE {")
    lines.extend("  " + str(p) for p in q.patterns)
    lines.extend(f"  FILTER({_expr(f)})" for f in q.filters)
    lines.append("}")
    if q.order_by is not None:
        lines.append(f"ORDER BY {q.order_by}")
    if q.limit is not None:
        lines.append(f"LIMIT {q.limit}")
    return "\n".join(lines) + "\n"


def expr_variables(e) -> set:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, BinOp):
        return expr_variables(e.left) | expr_variables(e.right)
    if isinstance(e, Abs):
        return expr_variables(e.arg)
    return set()
