"""RDF view of a SpatialGraph, indexed for pattern lookups."""

from __future__ import annotations

from collections import defaultdict

from distrag.sparql.ast import BNode, IRI
from distrag.turtle import CITIES_NS, RDF_TYPE, encode_local


def city_iri(display_name: str) -> IRI:
    return IRI(CITIES_NS + encode_local(display_name))


class TripleStore:
    """The triple set that ``serialize_turtle`` denotes, edges in both directions.

    Each directed edge ``a -> b`` contributes a blank node ``e``::

        a ns1:distanceTo e .  e ns1:destination b .  e ns1:distance d .
    """

    def __init__(self, triples):
        self.triples = list(triples)
        self.sp = defaultdict(list)
        self.po = defaultdict(list)
        self.p = defaultdict(list)
        for t in self.triples:
            s, p, o = t
            self.sp[(s, p)].append(t)
            self.po[(p, o)].append(t)
            self.p[p].append(t)

    def __len__(self):
        return len(self.triples)

    @classmethod
    def from_graph(cls, gr):
        from distrag.graph import neighbors

        type_ = IRI(RDF_TYPE)
        city = IRI(CITIES_NS + "City")
        dist_to = IRI(CITIES_NS + "distanceTo")
        dest = IRI(CITIES_NS + "destination")
        dist = IRI(CITIES_NS + "distance")
        triples = []
        n = 0
        for key in sorted(gr.nodes):
            subject = city_iri(gr.name(key))
            triples.append((subject, type_, city))
            for other, d in neighbors(gr, key):
                blank = BNode(f"e{n}")
                n += 1
                triples.append((subject, dist_to, blank))
                triples.append((blank, dest, city_iri(gr.name(other))))
                triples.append((blank, dist, d))
        return cls(triples)

    def match(self, s, p, o):
        """Triples matching the given constants (``None`` = wildcard)."""
        if s is not None and p is not None:
            cands = self.sp.get((s, p), ())
        elif p is not None and o is not None:
            cands = self.po.get((p, o), ())
        elif p is not None:
            cands = self.p.get(p, ())
        else:
            cands = self.triples
        for t in cands:
            if (s is None or _same(t[0], s)) and (p is None or _same(t[1], p)) and (o is None or _same(t[2], o)):
                yield t


def _same(a, b):
    # bool/int conflation is irrelevant here but IRI vs int must never match
    return type(a) is type(b) and a == b
