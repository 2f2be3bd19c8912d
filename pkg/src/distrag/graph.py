"""The distance knowledge store: an undirected graph of integer-km edges."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Union

from distrag.errors import TooFewCities, UnknownCity
from distrag.geo import Gazetteer, canonical_key, geodesic_km


def round_km(x: float) -> int:
    """Round half away from zero."""
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def edge_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


class SpatialGraph:
    """Immutable undirected weighted graph keyed by canonical city keys.

    ``edges`` maps a sorted key pair to the distance in whole kilometres;
    ``display`` maps each key to the human-readable name used in triples
    and prompts.
    """

    __slots__ = ("_nodes", "_edges", "_display", "_adj", "_store")

    def __init__(self, display: Mapping[str, str], edges: Mapping[tuple, int] = ()):
        self._display = dict(display)
        self._nodes = frozenset(self._display)
        norm = {}
        for (a, b), d in dict(edges).items():
            if a == b:
                raise ValueError(f"self-edge on {a!r}")
            for k in (a, b):
                if k not in self._nodes:
                    raise UnknownCity(k)
            if isinstance(d, bool) or not isinstance(d, int) or d < 0:
                raise ValueError(f"edge {a!r}-{b!r} has invalid distance {d!r}")
            norm[edge_key(a, b)] = d
        self._edges = norm
        adj = {k: {} for k in self._nodes}
        for (a, b), d in norm.items():
            adj[a][b] = d
            adj[b][a] = d
        self._adj = adj
        self._store = None

    @classmethod
    def from_names(cls, names: Iterable[str], edges: Mapping[tuple, int] = ()):
        """Build from display names; edge endpoints may be display names too."""
        display = {canonical_key(n): n for n in names}
        keyed = {(canonical_key(a), canonical_key(b)): d for (a, b), d in dict(edges).items()}
        return cls(display, keyed)

    @property
    def nodes(self) -> frozenset:
        return self._nodes

    @property
    def edges(self) -> dict:
        return dict(self._edges)

    @property
    def display(self) -> dict:
        return dict(self._display)

    def name(self, key: str) -> str:
        return self._display[key]

    def adjacency(self, key: str) -> dict:
        """Neighbour map of ``key`` (read-only view semantics: do not mutate)."""
        return self._adj[key]

    def __len__(self):
        return len(self._nodes)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def __eq__(self, other):
        if not isinstance(other, SpatialGraph):
            return NotImplemented
        return self._display == other._display and self._edges == other._edges

    def __hash__(self):
        return hash((frozenset(self._display.items()), frozenset(self._edges.items())))

    def __repr__(self):
        return f"SpatialGraph({len(self._nodes)} nodes, {len(self._edges)} edges)"

    def triple_store(self):
        """Lazily built RDF view used by the SPARQL evaluator."""
        if self._store is None:
            from distrag.sparql.store import TripleStore

            self._store = TripleStore.from_graph(self)
        return self._store


@dataclass(frozen=True)
class Complete:
    def __str__(self):
        return "complete"


@dataclass(frozen=True)
class KNearest:
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("KNearest.k must be positive")

    def __str__(self):
        return f"knearest:{self.k}"


@dataclass(frozen=True)
class Radius:
    r_km: int

    def __post_init__(self):
        if self.r_km < 1:
            raise ValueError("Radius.r_km must be positive")

    def __str__(self):
        return f"radius:{self.r_km}"


EdgePolicy = Union[Complete, KNearest, Radius]


def parse_policy(text: str) -> EdgePolicy:
    """Parse ``complete``, ``knearest:K`` or ``radius:KM``."""
    kind, _, arg = text.strip().lower().partition(":")
    if kind == "complete" and not arg:
        return Complete()
    try:
        value = int(arg)
    except ValueError:
        raise ValueError(f"bad edge policy {text!r}") from None
    if kind in ("knearest", "knn"):
        return KNearest(value)
    if kind == "radius":
        return Radius(value)
    raise ValueError(f"bad edge policy {text!r}")


def build_graph(g: Gazetteer, policy: EdgePolicy = Complete()) -> SpatialGraph:
    cities = list(g)
    if len(cities) < 2:
        raise TooFewCities(f"need at least 2 cities, got {len(cities)}")
    dist = {}
    for i, a in enumerate(cities):
        for b in cities[i + 1:]:
            dist[edge_key(a.canonical_key, b.canonical_key)] = round_km(geodesic_km(a.point, b.point))

    if isinstance(policy, Complete):
        edges = dist
    elif isinstance(policy, Radius):
        edges = {pair: d for pair, d in dist.items() if d <= policy.r_km}
    elif isinstance(policy, KNearest):
        edges = {}
        keys = [c.canonical_key for c in cities]
        for a in keys:
            ranked = sorted(
                ((dist[edge_key(a, b)], b) for b in keys if b != a),
            )
            for d, b in ranked[: policy.k]:
                edges[edge_key(a, b)] = d
    else:
        raise TypeError(f"unknown edge policy {policy!r}")
    return SpatialGraph({c.canonical_key: c.name for c in cities}, edges)


def sparsify(gr: SpatialGraph, sparsity: float, seed: int) -> SpatialGraph:
    """Drop ``floor(sparsity * |E|)`` edges chosen uniformly by a seeded RNG."""
    if not 0.0 <= sparsity <= 1.0:
        raise ValueError(f"sparsity {sparsity} outside [0, 1]")
    ordered = sorted(gr.edges)
    n_drop = math.floor(sparsity * len(ordered))
    # namespaced stream: must not mirror question sampling under the same seed
    dropped = set(random.Random(f"sparsify:{seed}").sample(ordered, n_drop))
    kept = {pair: d for pair, d in gr.edges.items() if pair not in dropped}
    return SpatialGraph(gr.display, kept)


def without_edge(gr: SpatialGraph, a: str, b: str) -> SpatialGraph:
    edges = gr.edges
    edges.pop(edge_key(a, b), None)
    return SpatialGraph(gr.display, edges)


def _check(gr: SpatialGraph, *keys):
    for k in keys:
        if k not in gr.nodes:
            raise UnknownCity(k)


def edge_distance(gr: SpatialGraph, a: str, b: str) -> Optional[int]:
    _check(gr, a, b)
    return gr.adjacency(a).get(b)


def neighbors(gr: SpatialGraph, a: str) -> list[tuple[str, int]]:
    _check(gr, a)
    return sorted(gr.adjacency(a).items(), key=lambda kv: (kv[1], kv[0]))


@dataclass(frozen=True, order=True)
class TripleText:
    subject: str
    object: str
    predicate_text: str

    @property
    def distance_km(self) -> int:
        return int(self.predicate_text.split()[0])

    def render(self) -> str:
        return f'("{self.subject}", "{self.object}", "{self.predicate_text}")'

    __str__ = render

    @classmethod
    def parse(cls, line: str) -> "TripleText":
        import re

        m = re.fullmatch(r'\("([^"]+)", "([^"]+)", "(\d+) km"\)', line.strip())
        if not m:
            raise ValueError(f"not a triple line: {line!r}")
        return cls(m.group(1), m.group(2), f"{m.group(3)} km")


def to_triple_texts(gr: SpatialGraph) -> list[TripleText]:
    triples = []
    for (a, b), d in gr.edges.items():
        na, nb = gr.name(a), gr.name(b)
        if nb < na:
            na, nb = nb, na
        triples.append(TripleText(na, nb, f"{d} km"))
    triples.sort(key=lambda t: (t.subject, t.object))
    return triples


def write_triple_lines(gr: SpatialGraph) -> str:
    return "".join(t.render() + "\n" for t in to_triple_texts(gr))


def read_triple_lines(text: str) -> SpatialGraph:
    """Inverse of :func:`write_triple_lines` (isolated nodes are not kept)."""
    names = {}
    edges = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        t = TripleText.parse(line)
        for n in (t.subject, t.object):
            names[canonical_key(n)] = n
        edges[(canonical_key(t.subject), canonical_key(t.object))] = t.distance_km
    return SpatialGraph(names, edges)
