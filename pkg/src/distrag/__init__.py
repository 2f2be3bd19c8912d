"""Distance-aware retrieval-augmented question answering over a city graph."""

from distrag.embed import LexicalHashEmbedder, RetrievalConfig, build_index, query_top_k, render_context
from distrag.evaluator import EvalConfig, Pipeline, compute_mse, parse_answer, run_ablation, run_pipeline
from distrag.evaluator import score_answer
from distrag.geo import City, GeoPoint, Gazetteer, geocode, geodesic_km, load_gazetteer
from distrag.graph import Complete, KNearest, Radius, SpatialGraph, build_graph, edge_distance
from distrag.graph import neighbors, sparsify, to_triple_texts
from distrag.questions import Difficulty, Question, generate_questions, gold_answer
from distrag.report import emit_report
from distrag.turtle import parse_turtle, serialize_turtle

__version__ = "0.1.0"
