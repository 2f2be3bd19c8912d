"""Command-line entry point: ``distrag <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from distrag.config import Config, PIPELINES, load_config
from distrag.embed import LexicalHashEmbedder, RemoteEmbedder
from distrag.errors import ConfigError, DistragError
from distrag.evaluator import EvalConfig, Pipeline, run_ablation, run_pipeline
from distrag.evaluator import Retrieval, _ask
from distrag.geo import load_gazetteer
from distrag.graph import build_graph, parse_policy, read_triple_lines, write_triple_lines
from distrag.llm import HttpClient, QueryTemplateHint, ReplayClient, ScriptedSparqlAuthor
from distrag.questions import Difficulty, Question, dump_questions, generate_questions
from distrag.questions import load_questions, parse_question_text
from distrag.report import EvaluationReport, emit_report
from distrag.sparql import evaluate_query, parse_query
from distrag.turtle import parse_turtle, serialize_turtle

log = logging.getLogger("distrag")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n\n{self.format_help()}")


def _common(p):
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--seed", type=int, help="seed for every random choice")
    p.add_argument("--out", help="output file or directory")
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    p.set_defaults(usage=p.format_help)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="distrag", description="Distance-aware retrieval toolkit over a city graph.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")

    p = sub.add_parser("build-graph", help="gazetteer CSV -> Turtle (or triple-line) graph file")
    _common(p)
    p.add_argument("--gazetteer", help="gazetteer CSV (or 'au50' for the bundled one)")
    p.add_argument("--policy", help="complete | knearest:K | radius:KM")
    p.add_argument("--format", choices=["ttl", "triples"], help="default: from --out suffix")

    p = sub.add_parser("gen-questions", help="graph -> questions JSON Lines")
    _common(p)
    p.add_argument("--graph", help="Turtle graph file")
    p.add_argument("--gazetteer", help="build the graph from this gazetteer instead")
    p.add_argument("--difficulty", default="all", help="Easy | Medium | Difficult | all")
    p.add_argument("--n", type=int, help="questions per family (default 20)")

    p = sub.add_parser("ask", help="answer a single question through one pipeline")
    _common(p)
    p.add_argument("--question", required=True)
    p.add_argument("--pipeline", choices=PIPELINES)
    p.add_argument("--graph")
    p.add_argument("--gazetteer")

    p = sub.add_parser("eval", help="run pipelines over a question set and write reports")
    _common(p)
    p.add_argument("--questions", help="questions JSONL (default: generate from the graph)")
    p.add_argument("--pipeline", help="comma-separated pipelines")

    p = sub.add_parser("ablate", help="sparsity sweep; writes ablation reports")
    _common(p)
    p.add_argument("--questions")
    p.add_argument("--pipeline", help="comma-separated pipelines")
    p.add_argument("--levels", help="comma-separated sparsity fractions")

    p = sub.add_parser("sparql", help="run a query file against a Turtle graph; prints TSV")
    _common(p)
    p.add_argument("--graph", required=True)
    p.add_argument("--query", required=True, help="query file, or '-' for stdin")
    return parser


# -- helpers ---------------------------------------------------------------


def _config(args, required=False) -> Config:
    if args.config:
        cfg = load_config(args.config)
    elif required:
        raise UsageError(f"distrag {args.command}: error: --config is required\n\n{args.usage()}")
    else:
        cfg = Config()
    overrides = {"seed": args.seed, "out": args.out}
    for name in ("gazetteer", "graph", "questions"):
        overrides[name] = getattr(args, name, None)
    pipeline = getattr(args, "pipeline", None)
    if pipeline:
        overrides["pipelines"] = tuple(p.strip().lower() for p in pipeline.split(",") if p.strip())
    levels = getattr(args, "levels", None)
    if levels:
        overrides["sparsity_levels"] = tuple(float(x) for x in levels.split(","))
    try:
        return cfg.with_overrides(**overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _load_world(cfg: Config):
    """Return (graph, gazetteer-or-None) from the config."""
    gaz = None
    if cfg.gazetteer_path() is not None:
        gaz = load_gazetteer(cfg.gazetteer_path())
    if cfg.graph:
        graph = parse_turtle(Path(cfg.graph).read_text(encoding="utf-8"))
    elif gaz is not None:
        graph = build_graph(gaz, parse_policy(cfg.policy))
    else:
        raise ConfigError("need a graph or a gazetteer")
    return graph, gaz


def _client(cfg: Config):
    if cfg.client == "scripted":
        return ScriptedSparqlAuthor()
    if cfg.client == "replay":
        return ReplayClient.from_file(cfg.replay_path, strict=cfg.replay_strict)
    return HttpClient(
        base_url=cfg.llm_url,
        model=cfg.llm_model,
        timeout=cfg.llm_timeout,
        max_retries=cfg.llm_max_retries,
        max_in_flight=cfg.max_in_flight,
    )


def _eval_config(cfg: Config, transcript=None) -> EvalConfig:
    if cfg.embedder == "remote":
        embedder = RemoteEmbedder(url=cfg.embed_url or "")
    else:
        embedder = LexicalHashEmbedder(cfg.embed_dim, cfg.embed_ngram)
    return EvalConfig(
        k=cfg.k,
        embedder=embedder,
        hint=QueryTemplateHint() if cfg.hint else None,
        max_workers=cfg.max_in_flight,
        transcript_path=transcript,
    )


def _questions(cfg: Config, graph) -> list[Question]:
    if cfg.questions:
        return load_questions(Path(cfg.questions).read_text(encoding="utf-8"))
    out = []
    for d in cfg.difficulties:
        out.extend(generate_questions(graph, Difficulty.parse(d), cfg.n_per_family, cfg.seed))
    return out


def _difficulties(text: str):
    if text.strip().lower() == "all":
        return list(Difficulty)
    return [Difficulty.parse(t) for t in text.split(",")]


# -- subcommands -----------------------------------------------------------


def cmd_build_graph(args) -> int:
    cfg = _config(args)
    if args.policy:
        cfg = cfg.with_overrides(policy=args.policy)
    if cfg.gazetteer_path() is None:
        raise UsageError("distrag build-graph: error: --gazetteer is required\n")
    if not cfg.out:
        raise UsageError("distrag build-graph: error: --out is required\n")
    graph = build_graph(load_gazetteer(cfg.gazetteer_path()), parse_policy(cfg.policy))
    fmt = args.format or ("triples" if cfg.out.endswith((".txt", ".triples")) else "ttl")
    text = serialize_turtle(graph) if fmt == "ttl" else write_triple_lines(graph)
    Path(cfg.out).write_text(text, encoding="utf-8")
    log.info("wrote %s (%d nodes, %d edges)", cfg.out, len(graph), graph.edge_count)
    return 0


def cmd_gen_questions(args) -> int:
    cfg = _config(args)
    if args.n is not None:
        cfg = cfg.with_overrides(n_per_family=args.n)
    graph, _ = _load_world(cfg)
    questions = []
    for d in _difficulties(args.difficulty):
        questions.extend(generate_questions(graph, d, cfg.n_per_family, cfg.seed))
    text = dump_questions(questions)
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_ask(args) -> int:
    cfg = _config(args)
    graph, _ = _load_world(cfg)
    pipeline = Pipeline(cfg.pipelines[0])
    parsed = parse_question_text(args.question)
    difficulty = parsed[0] if parsed else Difficulty.EASY
    q = Question("ask", difficulty, args.question, (), None)
    ecfg = _eval_config(cfg)
    _, raw, query, answer, _ = _ask(q, pipeline, Retrieval.build(graph, pipeline, ecfg), _client(cfg), ecfg)
    if query:
        log.info("query:\n%s", query)
    if hasattr(answer, "km"):
        print(f"{answer.km:g}")
    elif hasattr(answer, "name"):
        print(answer.name)
    else:
        print(f"(abstained: {answer.reason})")
    return 0


def cmd_eval(args) -> int:
    cfg = _config(args, required=True)
    if not cfg.out:
        raise UsageError("distrag eval: error: an output directory (--out or out =) is required\n")
    graph, gaz = _load_world(cfg)
    questions = _questions(cfg, graph)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    transcript = Path(cfg.transcript) if cfg.transcript else out / "transcript.jsonl"
    transcript.unlink(missing_ok=True)
    client = _client(cfg)
    ecfg = _eval_config(cfg, transcript)
    runs = [run_pipeline(questions, p, graph, gaz, client, ecfg) for p in cfg.pipelines]
    emit_report(EvaluationReport(runs=runs), out)
    for run in runs:
        for part in run.split_by_difficulty():
            mse = "-" if part.mse is None else f"{part.mse:.3g}"
            print(f"{part.pipeline}\t{part.difficulty}\tmse={mse}\tabstains={part.abstain_count}/{part.n}")
    return 0


def cmd_ablate(args) -> int:
    cfg = _config(args, required=True)
    if not cfg.out:
        raise UsageError("distrag ablate: error: an output directory (--out or out =) is required\n")
    graph, gaz = _load_world(cfg)
    questions = _questions(cfg, graph)
    client = _client(cfg)
    ecfg = _eval_config(cfg)
    ablations = [
        run_ablation(graph, cfg.sparsity_levels, questions, p, gaz, client, cfg.seed, ecfg)
        for p in cfg.pipelines
    ]
    emit_report(EvaluationReport(ablations=ablations), cfg.out)
    for a in ablations:
        for row in a.rows:
            print(f"{a.pipeline}\t{row.level:g}\t{row.difficulty}\t{row.response_rate:.3f}")
    return 0


def cmd_sparql(args) -> int:
    graph = parse_turtle(Path(args.graph).read_text(encoding="utf-8"))
    text = sys.stdin.read() if args.query == "-" else Path(args.query).read_text(encoding="utf-8")
    q = parse_query(text)
    tsv = evaluate_query(q, graph).to_tsv(q.prefixes)
    if args.out:
        Path(args.out).write_text(tsv, encoding="utf-8")
    else:
        sys.stdout.write(tsv)
    return 0


COMMANDS = {
    "build-graph": cmd_build_graph,
    "gen-questions": cmd_gen_questions,
    "ask": cmd_ask,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "sparql": cmd_sparql,
}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_help())
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
        )
        return COMMANDS[args.command](args)
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else 0
    except UsageError as exc:
        sys.stderr.write(str(exc))
        return 1
    except ConfigError as exc:
        sys.stderr.write(f"distrag: config error: {exc}\n")
        return 1
    except (DistragError, OSError, ValueError) as exc:
        sys.stderr.write(f"distrag: error: {exc}\n")
        return 2


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
