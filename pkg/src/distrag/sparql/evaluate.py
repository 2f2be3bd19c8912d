"""Evaluation of parsed queries against a SpatialGraph."""

from __future__ import annotations

from dataclasses import dataclass

from distrag.errors import SparqlTypeError
from distrag.sparql.ast import Abs, BinOp, BNode, IRI, Query, Var
from distrag.turtle import CITIES_NS, decode_local


@dataclass
class ResultTable:
    columns: list
    rows: list

    def __len__(self):
        return len(self.rows)

    def first_cell(self):
        return self.rows[0][0] if self.rows and self.columns else None

    def to_tsv(self, prefixes=()) -> str:
        lines = ["\t".join("?" + c for c in self.columns)]
        for row in self.rows:
            lines.append("\t".join(format_value(v, prefixes) for v in row))
        return "\n".join(lines) + "\n"


def format_value(v, prefixes=()) -> str:
    if isinstance(v, IRI):
        for prefix, ns in prefixes:
            if v.value.startswith(ns) and len(v.value) > len(ns):
                return f"{prefix}:{v.value[len(ns):]}"
        return str(v)
    return str(v)


def value_as_answer(v) -> str:
    """Render a result cell the way a model would state it."""
    if isinstance(v, IRI):
        if v.value.startswith(CITIES_NS):
            return decode_local(v.value[len(CITIES_NS):])
        return v.value
    return str(v)


def term_key(v):
    if isinstance(v, IRI):
        return (0, v.value)
    if isinstance(v, int) and not isinstance(v, bool):
        return (1, v)
    if isinstance(v, BNode):
        return (2, v.label)
    return (3, str(v))


def _kind(v):
    if isinstance(v, bool):
        return "boolean"
    if isinstance(v, int):
        return "integer"
    if isinstance(v, (IRI, BNode)):
        return "term"
    return type(v).__name__


def eval_expr(e, row):
    if isinstance(e, Var):
        return row[e.name]
    if isinstance(e, bool):
        return e
    if isinstance(e, (int, IRI)):
        return e
    if isinstance(e, Abs):
        v = eval_expr(e.arg, row)
        if _kind(v) != "integer":
            raise SparqlTypeError(e, f"ABS of {_kind(v)}")
        return abs(v)
    if isinstance(e, BinOp):
        a = eval_expr(e.left, row)
        b = eval_expr(e.right, row)
        ka, kb = _kind(a), _kind(b)
        op = e.op
        if op in ("&&", "||"):
            if ka != "boolean" or kb != "boolean":
                raise SparqlTypeError(e, f"{op} over {ka} and {kb}")
            return (a and b) if op == "&&" else (a or b)
        if op in ("=", "!="):
            if ka != kb:
                raise SparqlTypeError(e, f"{op} mixes {ka} and {kb}")
            return (a == b) if op == "=" else (a != b)
        if ka != "integer" or kb != "integer":
            raise SparqlTypeError(e, f"{op} over {ka} and {kb}")
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
    raise SparqlTypeError(e, "unknown expression")


def _resolve(t, row):
    if isinstance(t, Var):
        return row.get(t.name), t.name
    if isinstance(t, BNode):
        return row.get("_:" + t.label), "_:" + t.label
    return t, None


def _join(patterns, store):
    rows = [{}]
    for pat in patterns:
        nxt = []
        for row in rows:
            (s, sv), (p, pv), (o, ov) = (_resolve(x, row) for x in (pat.s, pat.p, pat.o))
            for ts, tp, to in store.match(s, p, o):
                new = dict(row)
                ok = True
                for var, val in ((sv, ts), (pv, tp), (ov, to)):
                    if var is None:
                        continue
                    if var in new:
                        if type(new[var]) is not type(val) or new[var] != val:
                            ok = False
                            break
                    else:
                        new[var] = val
                if ok:
                    nxt.append(new)
        rows = nxt
        if not rows:
            break
    return rows


def evaluate_query(q: Query, gr) -> ResultTable:
    """Join patterns in order, filter, sort, limit, then project.

    Rows are first put in a canonical order (projected columns, then the
    remaining named variables, compared value by value); ``ORDER BY`` is
    a stable sort on top of that, so ties stay deterministic.
    """
    store = gr.triple_store() if hasattr(gr, "triple_store") else gr
    rows = _join(q.patterns, store)
    for f in q.filters:
        kept = []
        for row in rows:
            v = eval_expr(f, row)
            if _kind(v) != "boolean":
                raise SparqlTypeError(f, f"filter yields {_kind(v)}")
            if v:
                kept.append(row)
        rows = kept

    columns = q.columns
    order_vars = columns + [v for v in q.named_variables() if v not in columns]
    rows.sort(key=lambda r: tuple(term_key(r[v]) for v in order_vars))

    if q.order_by is not None:
        keyed = [(eval_expr(q.order_by.expr, r), r) for r in rows]
        kinds = {_kind(k) for k, _ in keyed}
        if len(kinds) > 1:
            raise SparqlTypeError(q.order_by.expr, f"ORDER BY mixes {' and '.join(sorted(kinds))}")
        keyed.sort(key=lambda kr: term_key(kr[0]), reverse=q.order_by.descending)
        rows = [r for _, r in keyed]

    if q.limit is not None:
        rows = rows[: q.limit]
    return ResultTable(list(columns), [tuple(r[c] for c in columns) for r in rows])
