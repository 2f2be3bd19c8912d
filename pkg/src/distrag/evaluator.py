"""Run baseline / vector / SPARQL pipelines over a question set and score them."""

from __future__ import annotations

import enum
import json
import logging
import math
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from distrag.embed import LexicalHashEmbedder, RetrievalConfig, build_index, query_top_k, render_context
from distrag.errors import AuthError, DistragError, ReplayMiss, SparqlError
from distrag.geo import Gazetteer, geocode, geodesic_km, normalize_name
from distrag.graph import SpatialGraph, round_km, sparsify, to_triple_texts
from distrag.llm.prompts import QueryTemplateHint, TemplateId, load_template, render_prompt
from distrag.llm.prompts import render_sparql_prompt
from distrag.questions import ClosestCity, Difficulty, DistanceKm, Question, SimilarCity
from distrag.sparql import evaluate_query, extract_query_block, parse_query, value_as_answer

log = logging.getLogger(__name__)


class Pipeline(str, enum.Enum):
    BASELINE = "baseline"
    VECTOR = "vector"
    SPARQL = "sparql"

    def __str__(self):
        return self.value


# -- answers ---------------------------------------------------------------


@dataclass(frozen=True)
class AnswerKm:
    km: float


@dataclass(frozen=True)
class CityName:
    name: str


@dataclass(frozen=True)
class Abstain:
    reason: str = ""


Answer = Union[AnswerKm, CityName, Abstain]

_NUMBER = re.compile(
    r"[+-]?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?(?:\s*(?:km|kms|kilometers|kilometres))?",
    re.IGNORECASE,
)
_ABSTAIN_MARKERS = ("cannot", "unable", "don't know", "do not know", "no answer", "not possible")


def parse_answer(raw: str) -> Answer:
    text = (raw or "").strip()
    if text.endswith("."):
        text = text[:-1].rstrip()
    if not text:
        return Abstain("empty response")
    if _NUMBER.fullmatch(text):
        digits = re.match(r"[+-]?[\d,]+(?:\.\d+)?", text).group(0).replace(",", "")
        value = abs(float(digits))
        if math.isfinite(value):
            return AnswerKm(value)
    lowered = text.lower().replace("’", "'")
    if any(marker in lowered for marker in _ABSTAIN_MARKERS):
        return Abstain("refusal")
    return CityName(text)


# -- residuals and reports -------------------------------------------------


@dataclass(frozen=True)
class Residual:
    question_id: str
    difficulty: Difficulty
    y: float
    y_hat: Optional[float] = None
    reason: str = ""

    @property
    def error(self) -> Optional[float]:
        return None if self.y_hat is None else self.y - self.y_hat

    @property
    def answered(self) -> bool:
        return self.y_hat is not None


def _gold_distance(q: Question) -> int:
    g = q.gold
    if isinstance(g, DistanceKm):
        return g.km
    if isinstance(g, ClosestCity):
        return g.distance
    return g.target_distance


def _resolve_city(name: str, gr: SpatialGraph, g: Optional[Gazetteer]):
    """Return ``(canonical key, GeoPoint or None)`` for a model-named place."""
    if g is not None:
        city = geocode(name, g)
        if city is not None:
            return city.canonical_key, city.point
        return None
    # no gazetteer: fall back to the graph's own node names
    key = normalize_name(name)
    if key in gr.nodes:
        return key, None
    if key and "," not in key:
        hits = [k for k in gr.nodes if k.split(",", 1)[0] == key]
        if len(hits) == 1:
            return hits[0], None
    return None


def _distance_to(gr: SpatialGraph, g: Optional[Gazetteer], origin: str, resolved) -> Optional[int]:
    key, point = resolved
    if origin in gr.nodes and key in gr.nodes:
        d = gr.adjacency(origin).get(key)
        if d is not None:
            return d
    if key == origin:
        return 0
    if point is None or g is None or origin not in g:
        return None
    return round_km(geodesic_km(g[origin].point, point))


def score_answer(q: Question, a: Answer, gr: SpatialGraph, g: Optional[Gazetteer]) -> Residual:
    y = float(_gold_distance(q))

    def abstain(reason):
        return Residual(q.id, q.difficulty, y, None, reason)

    if isinstance(a, Abstain):
        return abstain(a.reason or "abstained")
    if q.difficulty is Difficulty.EASY:
        if isinstance(a, AnswerKm):
            return Residual(q.id, q.difficulty, y, a.km)
        return abstain("expected a distance")
    if q.difficulty is Difficulty.MEDIUM:
        if isinstance(a, AnswerKm):
            return Residual(q.id, q.difficulty, y, a.km)
        city = _resolve_city(a.name, gr, g)
        if city is None:
            return abstain(f"could not geocode {a.name!r}")
        d = _distance_to(gr, g, q.cities[0], city)
        if d is None:
            return abstain(f"no distance from {q.cities[0]} to {a.name!r}")
        return Residual(q.id, q.difficulty, y, float(d))
    if not isinstance(a, CityName):
        return abstain("expected a city name")
    city = _resolve_city(a.name, gr, g)
    if city is None:
        return abstain(f"could not geocode {a.name!r}")
    d = _distance_to(gr, g, q.cities[2], city)
    if d is None:
        return abstain(f"no distance from {q.cities[2]} to {a.name!r}")
    return Residual(q.id, q.difficulty, y, float(d))


def compute_mse(residuals) -> Optional[float]:
    errors = [r.error for r in residuals if r.answered]
    if not errors:
        return None
    return sum(e * e for e in errors) / len(errors)


HISTOGRAM_EDGES = (0, 100, 200, 300, 400, 500, 600, 700)
FINAL_BIN = ">700 km incl. abstain"


def histogram_labels() -> list[str]:
    labels = [f"[{lo},{hi})" for lo, hi in zip(HISTOGRAM_EDGES, HISTOGRAM_EDGES[1:])]
    return labels + [FINAL_BIN]


def bin_index(residual: Residual) -> int:
    if not residual.answered:
        return len(HISTOGRAM_EDGES) - 1
    err = abs(residual.error)
    for i, hi in enumerate(HISTOGRAM_EDGES[1:]):
        if err < hi:
            return i
    return len(HISTOGRAM_EDGES) - 1


def histogram(residuals) -> list[int]:
    counts = [0] * len(HISTOGRAM_EDGES)
    for r in residuals:
        counts[bin_index(r)] += 1
    return counts


@dataclass
class RunReport:
    pipeline: str
    difficulty: str
    residuals: list
    latencies: dict = field(default_factory=dict, repr=False)  # question id -> seconds

    @property
    def n(self) -> int:
        return len(self.residuals)

    @property
    def total_latency_s(self) -> float:
        return sum(self.latencies.get(r.question_id, 0.0) for r in self.residuals)

    @property
    def mse(self) -> Optional[float]:
        return compute_mse(self.residuals)

    @property
    def abstain_count(self) -> int:
        return sum(1 for r in self.residuals if not r.answered)

    @property
    def response_rate(self) -> float:
        return (self.n - self.abstain_count) / self.n if self.n else 0.0

    @property
    def histogram(self) -> list[int]:
        return histogram(self.residuals)

    def split_by_difficulty(self) -> list["RunReport"]:
        groups = {}
        for r in self.residuals:
            groups.setdefault(r.difficulty, []).append(r)
        order = list(Difficulty)
        return [
            RunReport(self.pipeline, d.value, rs, {r.question_id: self.latencies.get(r.question_id, 0.0) for r in rs})
            for d, rs in sorted(groups.items(), key=lambda kv: order.index(kv[0]))
        ]


# -- pipelines -------------------------------------------------------------


@dataclass
class EvalConfig:
    k: int = 10
    embedder: object = field(default_factory=LexicalHashEmbedder)
    hint: Optional[QueryTemplateHint] = None
    max_workers: int = 4
    transcript_path: Optional[Path] = None


@dataclass
class Retrieval:
    """Per-graph retrieval structures, rebuilt whenever the graph changes."""

    graph: SpatialGraph
    index: object = None

    @classmethod
    def build(cls, gr: SpatialGraph, pipeline: Pipeline, cfg: EvalConfig) -> "Retrieval":
        index = None
        if pipeline is Pipeline.VECTOR:
            index = build_index(to_triple_texts(gr), cfg.embedder)
        if pipeline is Pipeline.SPARQL:
            gr.triple_store()
        return cls(gr, index)


@dataclass
class Outcome:
    residual: Residual
    latency_s: float
    transcript: dict


def _ask(q: Question, pipeline: Pipeline, retrieval: Retrieval, client, cfg: EvalConfig):
    """Run one question; returns (raw response, query, answer, latency_s, prompt)."""
    live = not getattr(client, "deterministic", False)
    t0 = time.perf_counter()
    query_text = None
    if pipeline is Pipeline.BASELINE:
        prompt = render_prompt(load_template(TemplateId.BASELINE), {"question": q.text})
    elif pipeline is Pipeline.VECTOR:
        if len(retrieval.index) == 0:
            context = ""
        else:
            context = render_context(query_top_k(retrieval.index, q.text, RetrievalConfig(cfg.k)))
        prompt = render_prompt(load_template(TemplateId.VECTOR), {"question": q.text, "graph_context": context})
    else:
        skeleton = cfg.hint.skeleton(q.difficulty) if cfg.hint is not None else None
        prompt = render_sparql_prompt(q.text, skeleton)
    retrieval_s = time.perf_counter() - t0

    completion = client.complete(prompt)
    raw = completion.text

    t1 = time.perf_counter()
    if pipeline is Pipeline.SPARQL:
        query_text = extract_query_block(raw)
        if not query_text:
            answer = Abstain("no query in response")
        else:
            try:
                table = evaluate_query(parse_query(query_text), retrieval.graph)
            except SparqlError as exc:
                answer = Abstain(f"query failed: {exc}")
            else:
                cell = table.first_cell()
                answer = Abstain("empty result") if cell is None else parse_answer(value_as_answer(cell))
    else:
        answer = parse_answer(raw)
    retrieval_s += time.perf_counter() - t1

    # mocks report fixed latencies; adding wall-clock retrieval time would make reruns differ
    latency = completion.latency_s + (retrieval_s if live else 0.0)
    return prompt, raw, query_text, answer, latency


def _answer_json(a: Answer):
    if isinstance(a, AnswerKm):
        return {"kind": "DistanceKm", "km": a.km}
    if isinstance(a, CityName):
        return {"kind": "CityName", "name": a.name}
    return {"kind": "Abstain", "reason": a.reason}


def run_pipeline(
    questions,
    pipeline,
    gr: SpatialGraph,
    g: Optional[Gazetteer],
    client,
    cfg: Optional[EvalConfig] = None,
    retrieval: Optional[Retrieval] = None,
    score_graph: Optional[SpatialGraph] = None,
) -> RunReport:
    """Answer every question and return residuals in question order.

    ``gr`` is what retrieval sees; answers are scored against
    ``score_graph`` (default ``gr``), which the ablation keeps complete.
    """
    questions = list(questions)
    if not questions:
        raise ValueError("no questions to run")
    pipeline = Pipeline(pipeline)
    cfg = cfg or EvalConfig()
    retrieval = retrieval or Retrieval.build(gr, pipeline, cfg)

    def one(q: Question) -> Outcome:
        try:
            prompt, raw, query, answer, latency = _ask(q, pipeline, retrieval, client, cfg)
        except (ReplayMiss, AuthError):
            raise
        except DistragError as exc:
            log.warning("question %s failed: %s", q.id, exc)
            prompt, raw, query, answer, latency = None, None, None, Abstain(f"model error: {exc}"), 0.0
        residual = score_answer(q, answer, score_graph or gr, g)
        return Outcome(residual, latency, {
            "question_id": q.id,
            "prompt": prompt,
            "response": raw,
            "query": query,
            "answer": _answer_json(answer),
            "latency_ms": round(latency * 1000.0, 3),
        })

    workers = max(1, min(cfg.max_workers, len(questions)))
    if workers == 1:
        outcomes = [one(q) for q in questions]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # map() yields in submission order, whatever the completion order
            outcomes = list(pool.map(one, questions))

    if cfg.transcript_path is not None:
        path = Path(cfg.transcript_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("a", encoding="utf-8") as fh:
            for o in outcomes:
                fh.write(json.dumps(dict(o.transcript, pipeline=pipeline.value), ensure_ascii=False) + "\n")

    difficulties = {q.difficulty for q in questions}
    label = next(iter(difficulties)).value if len(difficulties) == 1 else "All"
    return RunReport(
        pipeline.value,
        label,
        [o.residual for o in outcomes],
        {o.residual.question_id: o.latency_s for o in outcomes},
    )


# -- ablation --------------------------------------------------------------

DEFAULT_LEVELS = (0.0, 0.25, 0.5, 0.75)


@dataclass
class AblationRow:
    level: float
    difficulty: str
    response_rate: float
    answered: int
    total: int


@dataclass
class AblationReport:
    pipeline: str
    rows: list = field(default_factory=list)
    runs: dict = field(default_factory=dict)  # level -> RunReport


def run_ablation(gr, levels, questions, pipeline, g, client, seed: int, cfg: Optional[EvalConfig] = None):
    """Re-run one pipeline on the same questions over progressively sparser graphs."""
    pipeline = Pipeline(pipeline)
    report = AblationReport(pipeline.value)
    questions = list(questions)
    for level in levels:
        if not 0.0 <= level <= 1.0:
            raise ValueError(f"sparsity level {level} outside [0, 1]")
    for level in levels:
        sparse = sparsify(gr, level, seed)
        run = run_pipeline(questions, pipeline, sparse, g, client, cfg, score_graph=gr)
        report.runs[level] = run
        for part in run.split_by_difficulty():
            answered = part.n - part.abstain_count
            report.rows.append(AblationRow(level, part.difficulty, part.response_rate, answered, part.n))
    return report
