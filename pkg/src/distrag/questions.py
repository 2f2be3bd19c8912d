"""Easy / Medium / Difficult distance questions with brute-force gold answers."""

from __future__ import annotations

import enum
import json
import random
import re
from collections import defaultdict
from dataclasses import dataclass
from typing import Optional, Union

from distrag.errors import InsufficientGraph, MissingEdge, NoCandidates, UnknownCity
from distrag.geo import canonical_key
from distrag.graph import SpatialGraph


class Difficulty(str, enum.Enum):
    EASY = "Easy"
    MEDIUM = "Medium"
    DIFFICULT = "Difficult"

    @classmethod
    def parse(cls, text) -> "Difficulty":
        if isinstance(text, Difficulty):
            return text
        for d in cls:
            if d.value.lower() == str(text).strip().lower():
                return d
        raise ValueError(f"unknown difficulty {text!r}")

    def __str__(self):
        return self.value


EASY_TEMPLATE = "What is the distance between {A} and {B}?"
MEDIUM_TEMPLATE = "What is the distance between {A} and its closest city?"
DIFFICULT_TEMPLATE = (
    "The distance from {A} to {B} is similar to the distance from {C} to what other city or town?"
)

_MEDIUM_RE = re.compile(r"What is the distance between (.+) and its closest city\?")
_EASY_RE = re.compile(r"What is the distance between (.+?) and (.+)\?")
_DIFFICULT_RE = re.compile(
    r"The distance from (.+?) to (.+) is similar to the distance from (.+) to what other city or town\?"
)


def question_text(difficulty: Difficulty, names) -> str:
    if difficulty is Difficulty.EASY:
        return EASY_TEMPLATE.format(A=names[0], B=names[1])
    if difficulty is Difficulty.MEDIUM:
        return MEDIUM_TEMPLATE.format(A=names[0])
    return DIFFICULT_TEMPLATE.format(A=names[0], B=names[1], C=names[2])


def parse_question_text(text: str) -> Optional[tuple[Difficulty, tuple[str, ...]]]:
    """Recover the family and display names from a question string."""
    text = text.strip()
    m = _MEDIUM_RE.fullmatch(text)
    if m:
        return Difficulty.MEDIUM, (m.group(1),)
    m = _DIFFICULT_RE.fullmatch(text)
    if m:
        return Difficulty.DIFFICULT, m.groups()
    m = _EASY_RE.fullmatch(text)
    if m:
        return Difficulty.EASY, m.groups()
    return None


@dataclass(frozen=True)
class DistanceKm:
    km: int


@dataclass(frozen=True)
class ClosestCity:
    key: str
    distance: int


@dataclass(frozen=True)
class SimilarCity:
    target_distance: int
    best_key: str
    best_abs_gap: int


GoldAnswer = Union[DistanceKm, ClosestCity, SimilarCity]


def gold_to_dict(gold: GoldAnswer) -> dict:
    if isinstance(gold, DistanceKm):
        return {"kind": "DistanceKm", "km": gold.km}
    if isinstance(gold, ClosestCity):
        return {"kind": "ClosestCity", "key": gold.key, "distance": gold.distance}
    return {
        "kind": "SimilarCity",
        "target_distance": gold.target_distance,
        "best_key": gold.best_key,
        "best_abs_gap": gold.best_abs_gap,
    }


def gold_from_dict(d: dict) -> GoldAnswer:
    kind = d["kind"]
    if kind == "DistanceKm":
        return DistanceKm(int(d["km"]))
    if kind == "ClosestCity":
        return ClosestCity(d["key"], int(d["distance"]))
    if kind == "SimilarCity":
        return SimilarCity(int(d["target_distance"]), d["best_key"], int(d["best_abs_gap"]))
    raise ValueError(f"unknown gold kind {kind!r}")


@dataclass(frozen=True)
class Question:
    id: str
    difficulty: Difficulty
    text: str
    cities: tuple
    gold: GoldAnswer

    def to_json(self) -> str:
        return json.dumps(
            {
                "id": self.id,
                "difficulty": self.difficulty.value,
                "text": self.text,
                "cities": list(self.cities),
                "gold": gold_to_dict(self.gold),
            },
            ensure_ascii=False,
        )

    @classmethod
    def from_json(cls, line: str) -> "Question":
        d = json.loads(line)
        return cls(
            id=d["id"],
            difficulty=Difficulty.parse(d["difficulty"]),
            text=d["text"],
            cities=tuple(d["cities"]),
            gold=gold_from_dict(d["gold"]),
        )


def dump_questions(questions) -> str:
    return "".join(q.to_json() + "\n" for q in questions)


def load_questions(text: str) -> list[Question]:
    return [Question.from_json(line) for line in text.splitlines() if line.strip()]


def _edge(gr: SpatialGraph, a: str, b: str) -> Optional[int]:
    return gr.adjacency(a).get(b)


def gold_answer(gr: SpatialGraph, difficulty, cities) -> GoldAnswer:
    """Exhaustive reference answer; every other component is checked against this."""
    difficulty = Difficulty.parse(difficulty)
    for k in cities:
        if k not in gr.nodes:
            raise UnknownCity(k)
    if difficulty is Difficulty.EASY:
        a, b = cities
        d = _edge(gr, a, b)
        if d is None:
            raise MissingEdge(a, b)
        return DistanceKm(d)
    if difficulty is Difficulty.MEDIUM:
        (a,) = cities
        best = None
        for other in sorted(gr.nodes):
            d = _edge(gr, a, other)
            if d is None:
                continue
            if best is None or d < best[1]:
                best = (other, d)
        if best is None:
            raise NoCandidates(f"{a!r} has no neighbours")
        return ClosestCity(*best)
    a, b, c = cities
    x = _edge(gr, a, b)
    if x is None:
        raise MissingEdge(a, b)
    best = None
    for other in sorted(gr.nodes):
        if other in (a, b, c):
            continue
        d = _edge(gr, c, other)
        if d is None:
            continue
        gap = abs(d - x)
        if best is None or gap < best[1]:
            best = (other, gap)
    if best is None:
        raise NoCandidates(f"{c!r} has no candidate neighbours outside {{A, B, C}}")
    return SimilarCity(x, best[0], best[1])


def generate_questions(gr: SpatialGraph, difficulty, n: int, seed: int) -> list[Question]:
    difficulty = Difficulty.parse(difficulty)
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = random.Random(f"questions:{difficulty.value}:{seed}")
    edges = sorted(gr.edges.items())
    if difficulty is Difficulty.EASY:
        if len(edges) < n:
            raise InsufficientGraph(f"only {len(edges)} edges for {n} Easy questions")
        picked = rng.sample(edges, n)
        tuples = []
        for (a, b), _ in picked:
            tuples.append((a, b) if rng.random() < 0.5 else (b, a))
    elif difficulty is Difficulty.MEDIUM:
        candidates = sorted(k for k in gr.nodes if gr.adjacency(k))
        if len(candidates) < n:
            raise InsufficientGraph(f"only {len(candidates)} connected cities for {n} Medium questions")
        tuples = [(k,) for k in rng.sample(candidates, n)]
    else:
        tuples = _difficult_tuples(gr, edges, n, rng)

    prefix = difficulty.value.lower()
    out = []
    for i, cities in enumerate(tuples):
        names = [gr.name(k) for k in cities]
        out.append(
            Question(
                id=f"{prefix}-{i:03d}",
                difficulty=difficulty,
                text=question_text(difficulty, names),
                cities=tuple(cities),
                gold=gold_answer(gr, difficulty, cities),
            )
        )
    return out


def _difficult_tuples(gr, edges, n, rng):
    by_distance = defaultdict(list)
    for pair, d in edges:
        by_distance[d].append(pair)
    ordered_pairs = [(a, b) for (a, b), _ in edges] + [(b, a) for (a, b), _ in edges]
    ordered_pairs.sort()
    rng.shuffle(ordered_pairs)
    tuples = []
    seen = set()
    for c, x in ordered_pairs:
        d = _edge(gr, c, x)
        matches = [p for p in by_distance[d] if not ({c, x} & set(p))]
        if not matches:
            continue
        a, b = matches[rng.randrange(len(matches))]
        if rng.random() < 0.5:
            a, b = b, a
        if (a, b, c) in seen:
            continue
        seen.add((a, b, c))
        tuples.append((a, b, c))
        if len(tuples) == n:
            return tuples
    raise InsufficientGraph(f"found {len(tuples)} of {n} Difficult tuples with an exact match")
