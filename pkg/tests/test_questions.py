import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distrag.errors import InsufficientGraph, MissingEdge, NoCandidates, UnknownCity
from distrag.graph import SpatialGraph
from distrag.questions import (
    ClosestCity, Difficulty, DistanceKm, SimilarCity, dump_questions, generate_questions,
    gold_answer, load_questions, parse_question_text, question_text,
)

from oracles import exhaustive_gold
from querygen import random_graph


def test_question_text_formats():
    assert question_text(Difficulty.EASY, ["Adelaide", "Perth"]) == \
        "What is the distance between Adelaide and Perth?"
    assert question_text(Difficulty.MEDIUM, ["Adelaide"]) == \
        "What is the distance between Adelaide and its closest city?"
    assert question_text(Difficulty.DIFFICULT, ["Adelaide", "Perth", "Cairns"]) == (
        "The distance from Adelaide to Perth is similar to the distance from "
        "Cairns to what other city or town?"
    )


@pytest.mark.parametrize("fam, names", [
    (Difficulty.EASY, ("Newcastle, NSW", "Sydney, NSW")),
    (Difficulty.MEDIUM, ("Mount Isa",)),
    (Difficulty.DIFFICULT, ("Adelaide", "Perth", "Alice Springs")),
])
def test_question_text_round_trip(fam, names):
    assert parse_question_text(question_text(fam, names)) == (fam, names)


def test_unrecognized_text():
    assert parse_question_text("How tall is Uluru?") is None


def test_difficulty_parse():
    assert Difficulty.parse("easy") is Difficulty.EASY
    with pytest.raises(ValueError):
        Difficulty.parse("hard")


def test_gold_on_prompt_fixture(prompt_graph):
    assert gold_answer(prompt_graph, "Easy", ("adelaide", "perth")) == DistanceKm(2135)
    assert gold_answer(prompt_graph, "Medium", ("adelaide",)) == ClosestCity("launceston", 1039)
    with pytest.raises(MissingEdge):
        gold_answer(prompt_graph, "Easy", ("perth", "cairns"))
    with pytest.raises(UnknownCity):
        gold_answer(prompt_graph, "Medium", ("atlantis",))


def test_gold_ties_are_lexicographic():
    gr = SpatialGraph.from_names(["Hub", "Zed", "Amy", "Bob"],
                                 {("Hub", "Zed"): 5, ("Hub", "Amy"): 5, ("Zed", "Bob"): 5})
    assert gold_answer(gr, "Medium", ("hub",)) == ClosestCity("amy", 5)
    assert gold_answer(gr, "Difficult", ("zed", "bob", "hub")) == SimilarCity(5, "amy", 0)


def test_difficult_without_candidates():
    gr = SpatialGraph.from_names(["A", "B", "C"], {("A", "B"): 1, ("B", "C"): 2})
    with pytest.raises(NoCandidates):
        gold_answer(gr, "Difficult", ("a", "b", "c"))


def test_generation_is_deterministic(au50_graph):
    for fam in Difficulty:
        a = dump_questions(generate_questions(au50_graph, fam, 20, seed=42))
        b = dump_questions(generate_questions(au50_graph, fam, 20, seed=42))
        assert a == b
        assert a != dump_questions(generate_questions(au50_graph, fam, 20, seed=43))


def test_dump_load_round_trip(au50_graph):
    qs = [q for fam in Difficulty for q in generate_questions(au50_graph, fam, 20, seed=7)]
    text = dump_questions(qs)
    assert load_questions(text) == qs
    assert dump_questions(load_questions(text)) == text


def test_generated_shapes(au50_graph):
    easy = generate_questions(au50_graph, "Easy", 20, seed=1)
    assert [q.id for q in easy[:2]] == ["easy-000", "easy-001"]
    assert len({frozenset(q.cities) for q in easy}) == 20
    medium = generate_questions(au50_graph, "Medium", 20, seed=1)
    assert len({q.cities for q in medium}) == 20
    difficult = generate_questions(au50_graph, "Difficult", 20, seed=1)
    for q in difficult:
        a, b, c = q.cities
        assert len({a, b, c}) == 3
        assert q.gold.best_abs_gap == 0
        assert q.gold.best_key not in (a, b, c)


def test_insufficient_graph():
    gr = SpatialGraph.from_names(["A", "B", "C"], {("A", "B"): 1})
    with pytest.raises(InsufficientGraph):
        generate_questions(gr, "Easy", 2, seed=0)
    with pytest.raises(InsufficientGraph):
        generate_questions(gr, "Medium", 3, seed=0)
    with pytest.raises(InsufficientGraph):
        generate_questions(gr, "Difficult", 1, seed=0)


def _as_tuple(gold):
    if isinstance(gold, DistanceKm):
        return ("DistanceKm", gold.km)
    if isinstance(gold, ClosestCity):
        return ("ClosestCity", gold.key, gold.distance)
    return ("SimilarCity", gold.target_distance, gold.best_key, gold.best_abs_gap)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_gold_matches_exhaustive_oracle(seed):
    rng = random.Random(seed)
    gr = random_graph(rng)
    keys = sorted(gr.nodes)
    for (a, b) in gr.edges:
        assert _as_tuple(gold_answer(gr, "Easy", (a, b))) == exhaustive_gold(gr, "Easy", (a, b))
    for a in keys:
        if gr.adjacency(a):
            assert _as_tuple(gold_answer(gr, "Medium", (a,))) == exhaustive_gold(gr, "Medium", (a,))
    for (a, b) in gr.edges:
        for c in keys:
            if c in (a, b):
                continue
            try:
                got = _as_tuple(gold_answer(gr, "Difficult", (a, b, c)))
            except NoCandidates:
                with pytest.raises(ValueError):
                    exhaustive_gold(gr, "Difficult", (a, b, c))
                continue
            assert got == exhaustive_gold(gr, "Difficult", (a, b, c))
