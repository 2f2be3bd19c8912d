"""Vector-similarity retrieval over graph triples.

The default embedder hashes character n-grams into a fixed number of
buckets, so retrieval is deterministic and needs no model download.  A
remote embedder can be swapped in through :class:`RemoteEmbedder`.
"""

from __future__ import annotations

import hashlib
import os
from collections import Counter
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
import requests

from distrag.errors import BadDimension, EmptyIndex, NetworkError
from distrag.graph import TripleText

BOUNDARY_START = "\x02"
BOUNDARY_END = "\x03"


@dataclass(frozen=True)
class LexicalHashEmbedder:
    dim: int = 4096
    ngram: int = 3

    def __post_init__(self):
        if self.dim < 64:
            raise ValueError("dim must be at least 64")
        if not 2 <= self.ngram <= 5:
            raise ValueError("ngram must be in [2, 5]")

    def ngrams(self, text: str) -> Counter:
        text = text.lower()
        if not text:
            return Counter()
        padded = BOUNDARY_START + text + BOUNDARY_END
        n = min(self.ngram, len(padded))
        return Counter(padded[i:i + n] for i in range(len(padded) - n + 1))

    def bucket(self, gram: str) -> int:
        digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little") % self.dim

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for row, text in enumerate(texts):
            counts = Counter()
            for gram, c in self.ngrams(text).items():
                counts[self.bucket(gram)] += c
            for b, c in counts.items():
                # sublinear damping keeps frequent n-grams from dominating
                out[row, b] = c / np.sqrt(1.0 + c)
        return _normalize_rows(out)


@dataclass
class RemoteEmbedder:
    """POSTs ``{"input": [...]}`` and expects ``{"vectors": [[...], ...]}``."""

    url: str = ""
    dim: int = 0
    timeout: float = 30.0
    session: object = None

    def __post_init__(self):
        self.url = self.url or os.environ.get("DISTRAG_EMBED_URL", "")
        if not self.url:
            raise ValueError("RemoteEmbedder needs a URL (or DISTRAG_EMBED_URL)")
        if self.session is None:
            self.session = requests.Session()

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        texts = list(texts)
        if not texts:
            return np.zeros((0, self.dim), dtype=np.float64)
        try:
            resp = self.session.post(self.url, json={"input": texts}, timeout=self.timeout)
            resp.raise_for_status()
            vectors = resp.json()["vectors"]
        except (requests.RequestException, ValueError, KeyError, TypeError) as exc:
            raise NetworkError(f"embedding request failed: {exc}") from exc
        try:
            arr = np.asarray(vectors, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise BadDimension(f"ragged or non-numeric vectors: {exc}") from exc
        if arr.ndim != 2 or arr.shape[0] != len(texts):
            raise BadDimension(f"expected {len(texts)} vectors, got shape {arr.shape}")
        if self.dim and arr.shape[1] != self.dim:
            raise BadDimension(f"expected dimension {self.dim}, got {arr.shape[1]}")
        if not self.dim:
            self.dim = arr.shape[1]
        return _normalize_rows(arr)


Embedder = Union[LexicalHashEmbedder, RemoteEmbedder]


def _normalize_rows(m: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    np.divide(m, norms, out=m, where=norms > 0)
    return m


def embed_text(text: str, e: Embedder) -> np.ndarray:
    return e.embed([text])[0]


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


@dataclass(frozen=True)
class RetrievalConfig:
    k: int = 10

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


class VectorIndex:
    def __init__(self, triples: Sequence[TripleText], vectors: np.ndarray, embedder: Embedder):
        self.triples = list(triples)
        self.vectors = vectors
        self.embedder = embedder

    def __len__(self):
        return len(self.triples)

    @property
    def entries(self):
        return list(zip(self.triples, self.vectors))


def build_index(triples: Sequence[TripleText], e: Embedder) -> VectorIndex:
    triples = list(triples)
    if not triples:
        dim = getattr(e, "dim", 0)
        return VectorIndex([], np.zeros((0, dim)), e)
    return VectorIndex(triples, e.embed([t.render() for t in triples]), e)


def query_top_k(idx: VectorIndex, question: str, cfg: RetrievalConfig = RetrievalConfig()):
    """Exact cosine top-k; returns ``[(TripleText, score), ...]``."""
    if len(idx) == 0:
        raise EmptyIndex("cannot query an empty index")
    q = embed_text(question, idx.embedder)
    scores = idx.vectors @ q
    # stable sort on the negated scores keeps index order among ties
    order = np.argsort(-scores, kind="stable")[: min(cfg.k, len(idx))]
    return [(idx.triples[i], float(scores[i])) for i in order]


def render_context(results) -> str:
    return "\n".join(
        f"The distance between {t.subject} and {t.object} is {t.predicate_text}."
        for t, _ in results
    )
