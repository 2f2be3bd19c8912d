"""Random graphs and question-shaped queries for oracle comparisons."""

import random

from distrag.graph import SpatialGraph

LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
PREFIX = "PREFIX ns1: <http://example.org/cities#>\n"


def random_graph(rng: random.Random, max_cities: int = 8) -> SpatialGraph:
    """Letter-only names; distances drawn from a small range so ties happen."""
    n = rng.randint(2, max_cities)
    names = rng.sample([f"Town {c}" if rng.random() < 0.3 else f"Town{c}" for c in LETTERS], n)
    edges = {}
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            if rng.random() < 0.7:
                edges[(a, b)] = rng.randint(1, 30) * 10
    return SpatialGraph.from_names(names, edges)


def _city(name):
    return "ns1:" + name.replace(" ", "_")


def random_query(rng: random.Random, gr: SpatialGraph) -> str:
    """A query in one of the three question shapes with random twists."""
    names = [gr.name(k) for k in sorted(gr.nodes)] + ["Nowhere"]
    a, b, c = (rng.choice(names) for _ in range(3))
    shape = rng.choice(["easy", "medium", "difficult"])
    limit = rng.choice([None, 1, 2, 3, 5])
    tail = f"LIMIT {limit}\n" if limit else ""
    if shape == "easy":
        sel = rng.choice(["?d", "*"])
        dest = _city(b) if rng.random() < 0.7 else "?x"
        return (PREFIX + f"SELECT {sel} WHERE {{\n  {_city(a)} ns1:distanceTo "
                f"[ ns1:destination {dest} ; ns1:distance ?d ] .\n}}\n" + tail)
    if shape == "medium":
        sel = rng.choice(["?d", "?city", "?city ?d", "*"])
        subj = _city(a) if rng.random() < 0.8 else "?src"
        order = rng.choice(["ASC(?d)", "DESC(?d)", "?d", "?city", "DESC(?city)", ""])
        flt = rng.choice(["", f"FILTER(?d > {rng.randint(0, 200)})", f"FILTER(?city != {_city(b)})"])
        typ = rng.choice(["", "?city a ns1:City ."])
        return (PREFIX + f"SELECT {sel} WHERE {{\n  {subj} ns1:distanceTo "
                f"[ ns1:destination ?city ; ns1:distance ?d ] .\n  {typ}\n  {flt}\n}}\n"
                + (f"ORDER BY {order}\n" if order else "") + tail)
    sel = rng.choice(["?city", "?city ?distance", "*"])
    order = rng.choice(["ASC(ABS(?distance - ?target))", "DESC(ABS(?distance - ?target))",
                        "(?distance * 2 - ?target)", ""])
    return (PREFIX + f"SELECT {sel} WHERE {{\n"
            f"  {_city(a)} ns1:distanceTo [ ns1:destination {_city(b)} ; ns1:distance ?target ] .\n"
            f"  {_city(c)} ns1:distanceTo [ ns1:destination ?city ; ns1:distance ?distance ] .\n"
            f"  FILTER(?city != {_city(a)} && ?city != {_city(b)})\n}}\n"
            + (f"ORDER BY {order}\n" if order else "") + tail)
