"""Turtle serialization of a SpatialGraph, and a parser for that dialect.

The emitted shape follows the per-city ``distanceTo`` listing::

    @prefix ns1: <http://example.org/cities#> .

    ns1:Adelaide a ns1:City ;
        ns1:distanceTo [ ns1:destination ns1:Launceston ; ns1:distance 1039 ],
            [ ns1:destination ns1:Perth ; ns1:distance 2135 ] .

Display names become local names with spaces replaced by underscores;
characters Turtle does not allow in a local name (the comma in
``Sydney, NSW`` for instance) are backslash-escaped.
"""

from __future__ import annotations

import re

from distrag.errors import ConflictingDistance, TurtleSyntaxError
from distrag.geo import canonical_key
from distrag.graph import SpatialGraph, edge_key, neighbors

CITIES_NS = "http://example.org/cities#"
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
PREFIX_LINE = f"@prefix ns1: <{CITIES_NS}> ."

_LOCAL_ESCAPES = set("~.-!$&'()*+,;=/?#@%")


def encode_local(display: str) -> str:
    out = []
    for i, ch in enumerate(display.replace(" ", "_")):
        if ch == "_" or ch.isalnum():
            out.append(ch)
        elif ch == "-" and i > 0:
            out.append(ch)
        elif ch in _LOCAL_ESCAPES:
            out.append("\\" + ch)
        else:
            out.extend(f"%{b:02X}" for b in ch.encode("utf-8"))
    return "".join(out)


_PCT = re.compile(r"(?:%[0-9A-Fa-f]{2})+")


def decode_local(local: str) -> str:
    """Turn an (escaped) local name back into its display name."""
    parts = re.split(r"(\\.)", local)
    text = []
    for part in parts:
        if part.startswith("\\") and len(part) == 2:
            text.append(part[1])
        else:
            text.append(_PCT.sub(lambda m: bytes.fromhex(m.group(0).replace("%", "")).decode("utf-8"), part))
    return "".join(text).replace("_", " ")


def serialize_turtle(gr: SpatialGraph) -> str:
    lines = [PREFIX_LINE]
    for key in sorted(gr.nodes):
        subject = "ns1:" + encode_local(gr.name(key))
        objs = [
            f"[ ns1:destination ns1:{encode_local(gr.name(other))} ; ns1:distance {d} ]"
            for other, d in neighbors(gr, key)
        ]
        lines.append("")
        if not objs:
            lines.append(f"{subject} a ns1:City .")
            continue
        lines.append(f"{subject} a ns1:City ;")
        body = ",\n        ".join(objs)
        lines.append(f"    ns1:distanceTo {body} .")
    return "\n".join(lines) + "\n"


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<directive>@prefix\b)
  | (?P<iri><[^<>"{}|^`\\\s]*>)
  | (?P<int>[+-]?\d+(?![\w.]))
  | (?P<pname>(?:[A-Za-z][\w-]*)?:(?:[^\s\\;,\[\]()<>"\#.%]|\\.|%[0-9A-Fa-f]{2}|\.(?=[^\s;,\[\]().]))*)
  | (?P<a>a(?=[\s\[<]))
  | (?P<punct>[\[\];,.])
    """,
    re.VERBOSE,
)


def _tokenize(text: str):
    pos, line = 0, 1
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise TurtleSyntaxError(line, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        value = m.group(0)
        if kind not in ("ws", "comment"):
            tokens.append((kind, value, line))
        line += value.count("\n")
        pos = m.end()
    tokens.append(("eof", "", line))
    return tokens


class _TurtleParser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0
        self.prefixes = {}
        self.display = {}
        self.directed = {}

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None, value=None):
        tok = self.tokens[self.i]
        if (kind and tok[0] != kind) or (value is not None and tok[1] != value):
            want = value or kind
            raise TurtleSyntaxError(tok[2], f"expected {want}, found {tok[1] or 'end of input'!r}")
        self.i += 1
        return tok

    def iri(self, tok):
        kind, value, line = tok
        if kind == "iri":
            return value[1:-1]
        if kind == "pname":
            prefix, _, local = value.partition(":")
            if prefix not in self.prefixes:
                raise TurtleSyntaxError(line, f"undeclared prefix {prefix!r}")
            return self.prefixes[prefix] + local
        raise TurtleSyntaxError(line, f"expected IRI, found {value or 'end of input'!r}")

    def city(self, tok):
        iri = self.iri(tok)
        if not iri.startswith(CITIES_NS) or len(iri) == len(CITIES_NS):
            raise TurtleSyntaxError(tok[2], f"{iri} is not a city IRI")
        name = decode_local(iri[len(CITIES_NS):])
        key = canonical_key(name)
        if self.display.setdefault(key, name) != name:
            raise TurtleSyntaxError(tok[2], f"{name!r} collides with {self.display[key]!r}")
        return key

    def parse(self):
        if self.peek()[0] == "eof":
            raise TurtleSyntaxError(self.peek()[2], "empty document")
        while self.peek()[0] == "directive":
            self.take()
            ns = self.take("pname")
            if not ns[1].endswith(":"):
                raise TurtleSyntaxError(ns[2], "expected prefix name ending in ':'")
            self.prefixes[ns[1][:-1]] = self.iri(self.take("iri"))
            self.take("punct", ".")
        if not self.prefixes:
            raise TurtleSyntaxError(self.peek()[2], "missing @prefix declaration")
        while self.peek()[0] != "eof":
            self.statement()
        edges = {}
        for (a, b), (d, line) in self.directed.items():
            pair = edge_key(a, b)
            if pair in edges and edges[pair] != d:
                raise ConflictingDistance(pair[0], pair[1], edges[pair], d)
            edges[pair] = d
        return SpatialGraph(self.display, edges)

    def statement(self):
        subject = self.city(self.peek())
        self.i += 1
        while True:
            tok = self.peek()
            if tok[0] == "a":
                self.take()
                obj = self.take()
                if self.iri(obj) != CITIES_NS + "City":
                    raise TurtleSyntaxError(obj[2], "only 'a ns1:City' is supported")
            else:
                self.i += 1
                pred = self.iri(tok)
                if pred != CITIES_NS + "distanceTo":
                    raise TurtleSyntaxError(tok[2], f"unsupported predicate <{pred}>")
                self.distance_entry(subject)
                while self.peek()[1] == ",":
                    self.take()
                    self.distance_entry(subject)
            sep = self.take("punct")
            if sep[1] == ".":
                return
            if sep[1] != ";":
                raise TurtleSyntaxError(sep[2], f"expected ';' or '.', found {sep[1]!r}")
            if self.peek()[1] == ".":
                self.take()
                return

    def distance_entry(self, subject):
        start = self.take("punct", "[")
        dest = dist = None
        while True:
            tok = self.take()
            pred = self.iri(tok)
            if pred == CITIES_NS + "destination":
                dest = self.city(self.take())
            elif pred == CITIES_NS + "distance":
                num = self.take("int")
                dist = int(num[1])
                if dist < 0:
                    raise TurtleSyntaxError(num[2], "negative distance")
            else:
                raise TurtleSyntaxError(tok[2], f"unsupported predicate <{pred}>")
            sep = self.take("punct")
            if sep[1] == "]":
                break
            if sep[1] != ";":
                raise TurtleSyntaxError(sep[2], f"expected ';' or ']', found {sep[1]!r}")
            if self.peek()[1] == "]":
                self.take()
                break
        if dest is None or dist is None:
            raise TurtleSyntaxError(start[2], "distance entry needs destination and distance")
        if dest == subject:
            raise TurtleSyntaxError(start[2], "self-edge")
        prev = self.directed.get((subject, dest))
        if prev is not None and prev[0] != dist:
            raise ConflictingDistance(subject, dest, prev[0], dist)
        self.directed[(subject, dest)] = (dist, start[2])


def parse_turtle(text: str) -> SpatialGraph:
    return _TurtleParser(text).parse()
