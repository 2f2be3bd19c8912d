"""Chat-model clients: live HTTP, transcript replay, and a scripted SPARQL author."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Protocol

import requests

from distrag.errors import AuthError, NetworkError, ReplayMiss
from distrag.llm.prompts import QueryTemplateHint, hint_from_prompt, instantiate_skeleton
from distrag.llm.prompts import question_from_prompt
from distrag.questions import Difficulty, parse_question_text

log = logging.getLogger(__name__)

REFUSAL = "I cannot construct this query."


@dataclass(frozen=True)
class Completion:
    text: str
    latency_s: float


class ModelClient(Protocol):
    deterministic: bool

    def complete(self, prompt: str) -> Completion: ...


def prompt_sha256(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class HttpClient:
    """OpenAI-style ``/chat/completions`` client with retries and an in-flight cap."""

    deterministic = False
    TRANSIENT_STATUS = {408, 409, 425, 429, 500, 502, 503, 504}

    def __init__(
        self,
        base_url: Optional[str] = None,
        model: str = "gpt-4-0613",
        timeout: float = 60.0,
        max_retries: int = 3,
        max_in_flight: int = 4,
        api_key: Optional[str] = None,
        backoff_s: float = 1.0,
        session=None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.base_url = (base_url or os.environ.get("DISTRAG_LLM_URL", "")).rstrip("/")
        if not self.base_url:
            raise ValueError("HttpClient needs a base URL (or DISTRAG_LLM_URL)")
        self.model = model
        self.timeout = timeout
        self.max_retries = max_retries
        self.api_key = api_key if api_key is not None else os.environ.get("DISTRAG_LLM_KEY", "")
        self.backoff_s = backoff_s
        self.session = session or requests.Session()
        self._sleep = sleep
        self._slots = threading.BoundedSemaphore(max_in_flight)

    def _payload(self, prompt: str) -> dict:
        return {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
        }

    def complete(self, prompt: str) -> Completion:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        url = f"{self.base_url}/chat/completions"
        with self._slots:
            start = time.perf_counter()
            last = "no attempt made"
            for attempt in range(self.max_retries + 1):
                delay = self.backoff_s * (2 ** attempt)
                try:
                    resp = self.session.post(url, json=self._payload(prompt), headers=headers, timeout=self.timeout)
                except (requests.ConnectionError, requests.Timeout) as exc:
                    last = f"{type(exc).__name__}: {exc}"
                else:
                    if resp.status_code in (401, 403):
                        raise AuthError(f"HTTP {resp.status_code} from {url}")
                    if resp.status_code == 200:
                        try:
                            text = resp.json()["choices"][0]["message"]["content"]
                        except (ValueError, KeyError, IndexError, TypeError) as exc:
                            raise NetworkError(f"malformed completion body: {exc}") from exc
                        return Completion(text or "", time.perf_counter() - start)
                    if resp.status_code not in self.TRANSIENT_STATUS:
                        raise NetworkError(f"HTTP {resp.status_code} from {url}")
                    last = f"HTTP {resp.status_code}"
                    retry_after = resp.headers.get("Retry-After")
                    if retry_after:
                        try:
                            delay = max(delay, float(retry_after))
                        except ValueError:
                            pass
                if attempt < self.max_retries:
                    log.warning("transient failure (%s), retrying in %.1fs", last, delay)
                    self._sleep(delay)
            raise NetworkError(f"giving up after {self.max_retries + 1} attempts: {last}")


class ReplayClient:
    """Serves recorded responses keyed by the prompt's SHA-256."""

    deterministic = True

    def __init__(self, responses: dict, strict: bool = True):
        self.responses = dict(responses)
        self.strict = strict

    @classmethod
    def from_file(cls, path, strict: bool = True) -> "ReplayClient":
        responses = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rec = json.loads(line)
                    responses[rec["prompt_sha256"]] = rec["response"]
        return cls(responses, strict=strict)

    @classmethod
    def from_pairs(cls, pairs, strict: bool = True) -> "ReplayClient":
        return cls({prompt_sha256(p): r for p, r in pairs}, strict=strict)

    def complete(self, prompt: str) -> Completion:
        digest = prompt_sha256(prompt)
        if digest in self.responses:
            return Completion(self.responses[digest], 0.0)
        if self.strict:
            raise ReplayMiss(digest)
        return Completion("", 0.0)


class RecordingClient:
    """Wraps a client and appends replay records for every completion."""

    def __init__(self, inner, path):
        self.inner = inner
        self.path = Path(path)
        self.deterministic = getattr(inner, "deterministic", False)
        self._lock = threading.Lock()

    def complete(self, prompt: str) -> Completion:
        c = self.inner.complete(prompt)
        rec = {"prompt_sha256": prompt_sha256(prompt), "response": c.text,
               "latency_ms": round(c.latency_s * 1000.0, 3)}
        with self._lock, self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(rec) + "\n")
        return c


_BUILTIN = QueryTemplateHint(difficult=None)


class ScriptedSparqlAuthor:
    """Deterministic stand-in for a model writing SPARQL from the SPARQL prompt.

    Knows the Easy and Medium query shapes on its own.  For Difficult
    questions it needs a skeleton, either its own ``hint`` or one embedded
    in the prompt; without one it refuses.
    """

    deterministic = True

    def __init__(self, hint: Optional[QueryTemplateHint] = None):
        self.hint = hint

    def author(self, prompt: str) -> str:
        question = question_from_prompt(prompt)
        parsed = parse_question_text(question) if question else None
        if parsed is None:
            return REFUSAL
        family, names = parsed
        skeleton = self.hint.skeleton(family) if self.hint is not None else None
        if skeleton is None:
            skeleton = hint_from_prompt(prompt)
        if skeleton is None and family is not Difficulty.DIFFICULT:
            skeleton = _BUILTIN.skeleton(family)
        if skeleton is None:
            return REFUSAL
        return instantiate_skeleton(skeleton, names)

    def complete(self, prompt: str) -> Completion:
        return Completion(self.author(prompt), 0.0)


def complete(prompt: str, c) -> Completion:
    return c.complete(prompt)
