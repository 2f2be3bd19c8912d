import numpy as np
import pytest

from distrag.embed import (
    LexicalHashEmbedder, RemoteEmbedder, RetrievalConfig, build_index, cosine, embed_text,
    query_top_k, render_context,
)
from distrag.errors import BadDimension, EmptyIndex, NetworkError
from distrag.graph import SpatialGraph, TripleText, to_triple_texts
from distrag.questions import Difficulty, generate_questions

from oracles import brute_cosine_rank


@pytest.fixture(scope="module")
def embedder():
    return LexicalHashEmbedder()


def test_deterministic_and_normalized(embedder):
    a = embed_text("How far is Adelaide from Perth?", embedder)
    b = LexicalHashEmbedder().embed(["How far is Adelaide from Perth?"])[0]
    assert np.array_equal(a, b)
    assert np.linalg.norm(a) == pytest.approx(1.0)
    assert cosine(a, a) == pytest.approx(1.0)


def test_empty_string_is_zero_vector(embedder):
    v = embed_text("", embedder)
    assert not v.any()
    assert cosine(v, embed_text("x", embedder)) == 0.0


def test_case_folding_and_dimension(embedder):
    assert np.array_equal(embed_text("PERTH", embedder), embed_text("perth", embedder))
    assert embed_text("perth", embedder).shape == (4096,)


@pytest.mark.parametrize("kwargs", [{"dim": 8}, {"ngram": 1}, {"ngram": 9}])
def test_rejects_bad_parameters(kwargs):
    with pytest.raises(ValueError):
        LexicalHashEmbedder(**kwargs)


def test_top_k_matches_brute_force(prompt_graph, embedder):
    idx = build_index(to_triple_texts(prompt_graph), embedder)
    q = "What is the distance between Adelaide and Cairns?"
    got = query_top_k(idx, q, RetrievalConfig(k=4))
    ranked = brute_cosine_rank(embed_text(q, embedder), idx.vectors)
    assert [idx.triples.index(t) for t, _ in got] == [i for _, i in ranked[:4]]
    for (_, s), (bs, _) in zip(got, ranked):
        assert s == pytest.approx(bs, abs=1e-12)
    assert got[0][0].render() == '("Adelaide", "Cairns", "2119 km")'


def test_k_larger_than_index(prompt_graph, embedder):
    idx = build_index(to_triple_texts(prompt_graph), embedder)
    assert len(query_top_k(idx, "Perth", RetrievalConfig(k=100))) == len(idx)


def test_ties_keep_index_order(embedder):
    same = [TripleText("A", "B", "1 km"), TripleText("A", "B", "1 km"), TripleText("A", "B", "1 km")]
    idx = build_index(same, embedder)
    got = query_top_k(idx, "A B", RetrievalConfig(k=3))
    assert [s for _, s in got] == [got[0][1]] * 3


def test_empty_index(embedder):
    idx = build_index(to_triple_texts(SpatialGraph({})), embedder)
    with pytest.raises(EmptyIndex):
        query_top_k(idx, "anything")


def test_k_must_be_positive():
    with pytest.raises(ValueError):
        RetrievalConfig(k=0)


def test_render_context(prompt_graph, embedder):
    idx = build_index(to_triple_texts(prompt_graph), embedder)
    hits = query_top_k(idx, "Newcastle Sydney", RetrievalConfig(k=1))
    assert render_context(hits) == "The distance between Newcastle, NSW and Sydney, NSW is 160 km."
    assert render_context([]) == ""


def test_gold_triple_recall_on_fixture(au50_graph, embedder):
    idx = build_index(to_triple_texts(au50_graph), embedder)
    qs = generate_questions(au50_graph, Difficulty.EASY, 40, seed=11)
    hits = 0
    for q in qs:
        names = {au50_graph.name(k) for k in q.cities}
        top = query_top_k(idx, q.text, RetrievalConfig(k=10))
        hits += any({t.subject, t.object} == names for t, _ in top)
    assert hits / len(qs) >= 0.95


# -- remote embedder ----------------------------------------------------------


def test_remote_embedder_normalizes(http_server):
    http_server.queue(200, {"vectors": [[3.0, 4.0], [0.0, 0.0]]})
    e = RemoteEmbedder(url=http_server.url + "/embed", dim=2)
    out = e.embed(["a", "b"])
    assert np.allclose(out, [[0.6, 0.8], [0.0, 0.0]])
    assert http_server.requests[0]["path"] == "/embed"


def test_remote_embedder_bad_dimension(http_server):
    http_server.queue(200, {"vectors": [[1.0, 2.0, 3.0]]})
    with pytest.raises(BadDimension):
        RemoteEmbedder(url=http_server.url, dim=2).embed(["a"])


def test_remote_embedder_wrong_count(http_server):
    http_server.queue(200, {"vectors": [[1.0, 2.0]]})
    with pytest.raises(BadDimension):
        RemoteEmbedder(url=http_server.url, dim=2).embed(["a", "b"])


def test_remote_embedder_server_error(http_server):
    http_server.queue(503, b"down")
    with pytest.raises(NetworkError):
        RemoteEmbedder(url=http_server.url, dim=2).embed(["a"])


def test_remote_embedder_needs_url(monkeypatch):
    monkeypatch.delenv("DISTRAG_EMBED_URL", raising=False)
    with pytest.raises(ValueError):
        RemoteEmbedder()
