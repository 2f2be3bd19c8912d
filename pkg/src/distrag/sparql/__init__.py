"""A SPARQL subset sized for distance questions over the city graph."""

from distrag.sparql.ast import Abs, BinOp, BNode, IRI, OrderBy, Query, TriplePattern, Var, print_query
from distrag.sparql.evaluate import ResultTable, evaluate_query, value_as_answer
from distrag.sparql.extract import extract_query_block
from distrag.sparql.parser import parse_query
from distrag.sparql.store import TripleStore, city_iri

__all__ = [
    "Abs", "BinOp", "BNode", "IRI", "OrderBy", "Query", "TriplePattern", "Var",
    "ResultTable", "TripleStore", "city_iri", "evaluate_query", "extract_query_block",
    "parse_query", "print_query", "value_as_answer",
]
