"""Tokenizer and recursive-descent parser for the supported SPARQL subset.

Supported: ``PREFIX``; ``SELECT *`` or a variable list; a single
``WHERE { ... }`` group of triple patterns (with ``;``/``,`` abbreviations
and ``[ ... ]`` blank-node property lists) and ``FILTER(expr)``;
``ORDER BY`` with one key; ``LIMIT n``.  Expressions cover integer
arithmetic (``+ - *``), comparisons, ``&&``/``||`` and ``ABS``.
"""

from __future__ import annotations

import re

from distrag.errors import SparqlSyntaxError, UnknownPrefix, UnsupportedFeature
from distrag.sparql.ast import Abs, BinOp, BNode, IRI, OrderBy, Query, TriplePattern, Var
from distrag.sparql.ast import expr_variables

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"

KEYWORDS = {"PREFIX", "SELECT", "WHERE", "FILTER", "ORDER", "BY", "ASC", "DESC", "LIMIT", "ABS"}
UNSUPPORTED = {
    "OPTIONAL", "UNION", "MINUS", "GRAPH", "SERVICE", "BIND", "VALUES", "GROUP", "HAVING",
    "OFFSET", "DISTINCT", "REDUCED", "CONSTRUCT", "ASK", "DESCRIBE", "FROM", "NAMED",
    "INSERT", "DELETE", "LOAD", "CLEAR", "DROP", "CREATE", "BASE", "EXISTS", "NOT", "IN",
    "COUNT", "SUM", "MIN", "MAX", "AVG", "SAMPLE", "GROUP_CONCAT", "STR", "LANG", "REGEX",
    "BOUND", "IF", "COALESCE", "ROUND", "CEIL", "FLOOR", "CONCAT", "CONTAINS", "STRSTARTS",
    "SAMETERM", "ISIRI", "ISURI", "ISLITERAL", "ISBLANK", "DATATYPE", "AS", "TRUE", "FALSE",
}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<iri><[^<>"{}|^`\\\s]*>)
  | (?P<var>[?$][A-Za-z_][\w]*)
  | (?P<blank>_:[\w][\w.-]*(?<!\.))
  | (?P<decimal>\d*\.\d+(?:[eE][+-]?\d+)?)
  | (?P<int>\d+)
  | (?P<pname>(?:[A-Za-z][\w-]*)?:(?:[^\s\\;,\[\](){}<>"'\#.%!=&|*+]|\\.|%[0-9A-Fa-f]{2}|\.(?=[^\s;,\[\](){}.]))*)
  | (?P<word>[A-Za-z_][\w]*)
  | (?P<op>&&|\|\||!=|<=|>=|[=<>+\-*/!])
  | (?P<punct>[{}()\[\].;,])
  | (?P<string>"[^"]*"|'[^']*')
    """,
    re.VERBOSE,
)


class Token:
    __slots__ = ("kind", "value", "pos")

    def __init__(self, kind, value, pos):
        self.kind, self.value, self.pos = kind, value, pos

    def is_word(self, word):
        return self.kind == "word" and self.value.upper() == word

    def __repr__(self):
        return f"Token({self.kind}, {self.value!r}, {self.pos})"


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise SparqlSyntaxError(pos, "a token", text[pos])
        kind = m.lastgroup
        if kind == "string":
            raise UnsupportedFeature("string literal")
        if kind == "decimal":
            raise UnsupportedFeature("decimal literal")
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(0), pos))
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0
        self.prefixes = []
        self.patterns = []
        self.filters = []
        used = {t.value[2:] for t in self.tokens if t.kind == "blank"}
        self._fresh = (f"genid{n}" for n in _count() if f"genid{n}" not in used)

    # -- token helpers ----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected):
        tok = self.peek()
        if tok.kind == "word" and tok.value.upper() in UNSUPPORTED:
            raise UnsupportedFeature(tok.value.upper())
        if tok.kind == "op" and tok.value in ("/", "!"):
            raise UnsupportedFeature(tok.value)
        raise SparqlSyntaxError(tok.pos, expected, tok.value or "end of input")

    def expect_word(self, word):
        if not self.peek().is_word(word):
            self.fail(word)
        return self.advance()

    def expect_punct(self, ch):
        tok = self.peek()
        if tok.kind != "punct" or tok.value != ch:
            self.fail(repr(ch))
        return self.advance()

    def at_punct(self, ch):
        tok = self.peek()
        return tok.kind == "punct" and tok.value == ch

    def at_op(self, *ops):
        tok = self.peek()
        return tok.kind == "op" and tok.value in ops

    # -- grammar ----------------------------------------------------------

    def parse(self) -> Query:
        if self.peek().kind == "eof":
            raise SparqlSyntaxError(0, "PREFIX or SELECT", "end of input")
        while self.peek().is_word("PREFIX"):
            self.advance()
            tok = self.advance()
            if tok.kind != "pname" or not tok.value.endswith(":") or tok.value.count(":") != 1:
                self.i -= 1
                self.fail("prefix name")
            iri = self.advance()
            if iri.kind != "iri":
                self.i -= 1
                self.fail("IRI")
            self.prefixes.append((tok.value[:-1], iri.value[1:-1]))
        self.expect_word("SELECT")
        select = self.projection()
        if self.peek().is_word("WHERE"):
            self.advance()
        self.group()
        order_by = self.order_by()
        limit = None
        if self.peek().is_word("LIMIT"):
            self.advance()
            tok = self.peek()
            if tok.kind != "int" or int(tok.value) < 1:
                self.fail("positive integer")
            limit = int(self.advance().value)
        if self.peek().kind != "eof":
            self.fail("end of query")

        q = Query(
            prefixes=tuple(self.prefixes),
            select=select,
            patterns=tuple(self.patterns),
            filters=tuple(self.filters),
            order_by=order_by,
            limit=limit,
        )
        bound = set(q.named_variables())
        used = set(select or ())
        for f in q.filters:
            used |= expr_variables(f)
        if order_by is not None:
            used |= expr_variables(order_by.expr)
        missing = sorted(used - bound)
        if missing:
            raise SparqlSyntaxError(self.peek().pos, f"?{missing[0]} to appear in a triple pattern")
        return q

    def projection(self):
        tok = self.peek()
        if tok.kind == "op" and tok.value == "*":
            self.advance()
            return None
        names = []
        while self.peek().kind == "var":
            name = self.advance().value[1:]
            if name not in names:
                names.append(name)
        if not names:
            self.fail("'*' or a variable")
        return tuple(names)

    def group(self):
        self.expect_punct("{")
        while not self.at_punct("}"):
            tok = self.peek()
            if tok.is_word("FILTER"):
                self.advance()
                self.expect_punct("(")
                self.filters.append(self.expr())
                self.expect_punct(")")
            elif self.at_punct("."):
                self.advance()
            elif self.at_punct("{"):
                raise UnsupportedFeature("nested group")
            elif tok.kind == "eof":
                self.fail("'}'")
            else:
                self.triples_same_subject()
                if not (self.at_punct(".") or self.at_punct("}") or self.peek().is_word("FILTER")):
                    self.fail("'.' or '}'")
        self.advance()

    def triples_same_subject(self):
        if self.at_punct("["):
            self.advance()
            subject = BNode(next(self._fresh))
            if not self.at_punct("]"):
                self.property_list(subject)
            self.expect_punct("]")
            if not (self.at_punct(".") or self.at_punct("}")):
                self.property_list(subject)
            return
        subject = self.term(allow_literal=False)
        self.property_list(subject)

    def property_list(self, subject):
        while True:
            pred = self.verb()
            self.objects(subject, pred)
            if not self.at_punct(";"):
                return
            while self.at_punct(";"):
                self.advance()
            tok = self.peek()
            if tok.kind == "punct" and tok.value in ".]}":
                return

    def verb(self):
        tok = self.peek()
        if tok.kind == "word" and tok.value == "a":
            self.advance()
            return IRI(RDF_TYPE)
        if tok.kind in ("var", "iri", "pname"):
            return self.term(allow_literal=False)
        self.fail("predicate")

    def objects(self, subject, pred):
        while True:
            if self.at_punct("["):
                self.advance()
                node = BNode(next(self._fresh))
                self.patterns.append(TriplePattern(subject, pred, node))
                if not self.at_punct("]"):
                    self.property_list(node)
                self.expect_punct("]")
            else:
                obj = self.term(allow_literal=True)
                self.patterns.append(TriplePattern(subject, pred, obj))
            if not self.at_punct(","):
                return
            self.advance()

    def term(self, allow_literal):
        tok = self.peek()
        if tok.kind == "var":
            self.advance()
            return Var(tok.value[1:])
        if tok.kind == "blank":
            self.advance()
            return BNode(tok.value[2:])
        if tok.kind in ("iri", "pname"):
            return self.iri()
        if tok.kind == "int" and allow_literal:
            self.advance()
            return int(tok.value)
        self.fail("term")

    def iri(self):
        tok = self.advance()
        if tok.kind == "iri":
            return IRI(tok.value[1:-1])
        prefix, _, local = tok.value.partition(":")
        table = dict(self.prefixes)
        if prefix not in table:
            raise UnknownPrefix(prefix)
        return IRI(table[prefix] + local)

    def order_by(self):
        if not self.peek().is_word("ORDER"):
            return None
        self.advance()
        self.expect_word("BY")
        tok = self.peek()
        if tok.is_word("ASC") or tok.is_word("DESC"):
            self.advance()
            self.expect_punct("(")
            e = self.expr()
            self.expect_punct(")")
            key = OrderBy(e, descending=tok.value.upper() == "DESC")
        elif tok.kind == "var":
            self.advance()
            key = OrderBy(Var(tok.value[1:]))
        elif self.at_punct("("):
            self.advance()
            e = self.expr()
            self.expect_punct(")")
            key = OrderBy(e)
        else:
            self.fail("order condition")
        nxt = self.peek()
        if nxt.kind == "var" or self.at_punct("(") or nxt.is_word("ASC") or nxt.is_word("DESC"):
            raise UnsupportedFeature("multiple ORDER BY keys")
        return key

    # -- expressions ------------------------------------------------------

    def expr(self):
        left = self.and_expr()
        while self.at_op("||"):
            self.advance()
            left = BinOp("||", left, self.and_expr())
        return left

    def and_expr(self):
        left = self.rel_expr()
        while self.at_op("&&"):
            self.advance()
            left = BinOp("&&", left, self.rel_expr())
        return left

    def rel_expr(self):
        left = self.add_expr()
        if self.at_op("=", "!=", "<", "<=", ">", ">="):
            op = self.advance().value
            left = BinOp(op, left, self.add_expr())
        return left

    def add_expr(self):
        left = self.mul_expr()
        while self.at_op("+", "-"):
            op = self.advance().value
            left = BinOp(op, left, self.mul_expr())
        return left

    def mul_expr(self):
        left = self.primary()
        while self.at_op("*"):
            self.advance()
            left = BinOp("*", left, self.primary())
        return left

    def primary(self):
        tok = self.peek()
        if tok.kind == "var":
            self.advance()
            return Var(tok.value[1:])
        if tok.kind == "int":
            self.advance()
            return int(tok.value)
        if tok.kind in ("iri", "pname"):
            return self.iri()
        if tok.is_word("ABS"):
            self.advance()
            self.expect_punct("(")
            e = self.expr()
            self.expect_punct(")")
            return Abs(e)
        if self.at_punct("("):
            self.advance()
            e = self.expr()
            self.expect_punct(")")
            return e
        self.fail("expression")


def _count():
    n = 0
    while True:
        yield n
        n += 1


def parse_query(text: str) -> Query:
    return _Parser(text).parse()
