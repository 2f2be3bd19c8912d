import hashlib
import json
import random
import threading
import time

import pytest

from distrag.errors import AuthError, MissingSlot, NetworkError, ReplayMiss, UnknownSlot
from distrag.llm import (
    HttpClient, QueryTemplateHint, RecordingClient, ReplayClient, ScriptedSparqlAuthor, TemplateId,
    load_template, prompt_sha256, render_prompt,
)
from distrag.llm.clients import REFUSAL
from distrag.llm.prompts import (
    DIFFICULT_SKELETON, HINT_HEADING, hint_from_prompt, question_from_prompt, render_sparql_prompt,
)
from distrag.questions import Difficulty, generate_questions, question_text
from distrag.sparql import evaluate_query, extract_query_block, parse_query

GOLDEN = {
    TemplateId.BASELINE: "1b858f8ae95ce3baad9c1f3c5912848c1638c2256f5e67ed8443874e44622bbb",
    TemplateId.SPARQL: "56d08f034f0a7e8ceddb43b424bf8876e90f7dfbf4b58596d8c2b986e1345dfc",
    TemplateId.VECTOR: "6bcce2b76fc9138edfe9aa6c770ebeedf62e4fbf146efced1374b4b73d2d7a6c",
}


@pytest.mark.parametrize("tid", list(TemplateId))
def test_templates_are_byte_exact(tid):
    body = load_template(tid).body
    assert hashlib.sha256(body.encode("utf-8")).hexdigest() == GOLDEN[tid]


def test_template_slots_and_phrases():
    assert load_template("vector").slots == {"question", "graph_context"}
    assert load_template("sparql").slots == {"question"}
    assert load_template("baseline").slots == {"question"}
    assert "[ ns1:destination ns1:Perth ; ns1:distance 2135 ]," in load_template("sparql").body
    assert "Only return the distance (km)" in load_template("baseline").body


def test_render_vector_prompt():
    p = render_prompt(load_template("vector"), {"question": "Q?", "graph_context": "ctx"})
    assert p.endswith(" Question:  Q?\n Context:  ctx\n")


def test_empty_context_is_allowed():
    p = render_prompt(load_template("vector"), {"question": "Q?", "graph_context": ""})
    assert p.endswith(" Context:  \n")


def test_missing_and_unknown_slots():
    t = load_template("vector")
    with pytest.raises(MissingSlot):
        render_prompt(t, {"question": "Q?"})
    with pytest.raises(UnknownSlot):
        render_prompt(t, {"question": "Q?", "graph_context": "", "extra": 1})


def test_bound_values_are_not_reexpanded():
    p = render_prompt(load_template("baseline"), {"question": "{question}"})
    assert "Question:  {question}" in p


def test_hint_section_round_trips():
    q = question_text(Difficulty.DIFFICULT, ["Adelaide", "Perth", "Cairns"])
    p = render_sparql_prompt(q, DIFFICULT_SKELETON)
    assert p.index(HINT_HEADING) < p.index(" ### Question:")
    assert "{A}" not in p and "ns1:CITY_A" in p
    assert hint_from_prompt(p) == DIFFICULT_SKELETON
    assert question_from_prompt(p) == q
    assert hint_from_prompt(render_sparql_prompt(q)) is None


# -- mock clients -------------------------------------------------------------


def test_replay_is_pure_and_strict():
    c = ReplayClient.from_pairs([("hello", "2135")])
    assert c.complete("hello").text == c.complete("hello").text == "2135"
    with pytest.raises(ReplayMiss) as exc:
        c.complete("other")
    assert exc.value.digest == prompt_sha256("other")
    assert ReplayClient.from_pairs([], strict=False).complete("x").text == ""


def test_recording_then_replay(tmp_path):
    path = tmp_path / "rec.jsonl"
    rec = RecordingClient(ReplayClient.from_pairs([("p1", "a"), ("p2", "b")]), path)
    rec.complete("p1")
    rec.complete("p2")
    lines = [json.loads(x) for x in path.read_text().splitlines()]
    assert [x["response"] for x in lines] == ["a", "b"]
    replay = ReplayClient.from_file(path)
    assert replay.complete("p2").text == "b"


def test_scripted_author_easy_and_medium(au50_graph):
    author = ScriptedSparqlAuthor()
    rng = random.Random(0)
    for fam in (Difficulty.EASY, Difficulty.MEDIUM):
        for q in generate_questions(au50_graph, fam, 10, seed=rng.randint(0, 999)):
            text = extract_query_block(author.complete(render_sparql_prompt(q.text)).text)
            assert len(evaluate_query(parse_query(text), au50_graph)) == 1


def test_scripted_author_difficult_needs_hint(au50_graph):
    q = generate_questions(au50_graph, Difficulty.DIFFICULT, 1, seed=1)[0]
    assert ScriptedSparqlAuthor().complete(render_sparql_prompt(q.text)).text == REFUSAL
    for prompt, author in [
        (render_sparql_prompt(q.text, DIFFICULT_SKELETON), ScriptedSparqlAuthor()),
        (render_sparql_prompt(q.text), ScriptedSparqlAuthor(QueryTemplateHint())),
    ]:
        table = evaluate_query(parse_query(author.complete(prompt).text), au50_graph)
        assert len(table) == 1


def test_scripted_author_refuses_unknown_question():
    assert ScriptedSparqlAuthor().complete(render_sparql_prompt("Why is the sky blue?")).text == REFUSAL


# -- HTTP client ---------------------------------------------------------------


def _ok(text):
    return {"choices": [{"message": {"content": text}}]}


def test_http_client_request_shape(http_server):
    http_server.queue(200, _ok("2135"))
    c = HttpClient(base_url=http_server.url, api_key="k", sleep=lambda s: None)
    out = c.complete("prompt")
    assert out.text == "2135" and out.latency_s >= 0
    req = http_server.requests[0]
    assert req["path"] == "/chat/completions"
    assert req["headers"]["Authorization"] == "Bearer k"
    body = json.loads(req["body"])
    assert body["temperature"] == 0 and body["messages"][0]["content"] == "prompt"


def test_http_client_retries_with_backoff(http_server):
    http_server.queue(503, b"")
    http_server.queue(429, b"", {"Retry-After": "7"})
    http_server.queue(200, _ok("ok"))
    sleeps = []
    c = HttpClient(base_url=http_server.url, backoff_s=0.5, sleep=sleeps.append)
    assert c.complete("p").text == "ok"
    assert sleeps == [0.5, 7.0]


def test_http_client_gives_up(http_server):
    for _ in range(3):
        http_server.queue(500, b"")
    c = HttpClient(base_url=http_server.url, max_retries=2, sleep=lambda s: None)
    with pytest.raises(NetworkError):
        c.complete("p")
    assert len(http_server.requests) == 3


@pytest.mark.parametrize("status", [401, 403])
def test_http_client_auth_error_not_retried(http_server, status):
    http_server.queue(status, b"")
    with pytest.raises(AuthError):
        HttpClient(base_url=http_server.url, sleep=lambda s: None).complete("p")
    assert len(http_server.requests) == 1


def test_http_client_malformed_body(http_server):
    http_server.queue(200, {"nope": 1})
    with pytest.raises(NetworkError):
        HttpClient(base_url=http_server.url, sleep=lambda s: None).complete("p")


def test_http_client_connection_refused():
    c = HttpClient(base_url="http://127.0.0.1:9", max_retries=1, timeout=1, sleep=lambda s: None)
    with pytest.raises(NetworkError):
        c.complete("p")


def test_http_client_caps_in_flight():
    active, peak = [0], [0]
    lock = threading.Lock()

    class SlowSession:
        def post(self, *a, **kw):
            with lock:
                active[0] += 1
                peak[0] = max(peak[0], active[0])
            time.sleep(0.02)
            with lock:
                active[0] -= 1

            class R:
                status_code = 200
                headers = {}

                def json(self):
                    return _ok("x")
            return R()

    c = HttpClient(base_url="http://unused", max_in_flight=2, session=SlowSession())
    threads = [threading.Thread(target=c.complete, args=("p",)) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert peak[0] == 2
