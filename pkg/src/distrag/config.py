"""``key = value`` run configuration.

Blank lines and ``#`` comments are ignored.  Unknown keys are rejected
so that a typo never silently falls back to a default.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Optional

from distrag.errors import ConfigError
from distrag.graph import parse_policy
from distrag.questions import Difficulty

PIPELINES = ("baseline", "vector", "sparql")
CLIENTS = ("scripted", "replay", "http")
EMBEDDERS = ("lexical", "remote")
BUILTIN_GAZETTEERS = {"au50": "au50.csv"}


@dataclass(frozen=True)
class Config:
    gazetteer: Optional[str] = None
    graph: Optional[str] = None
    policy: str = "complete"
    k: int = 10
    sparsity_levels: tuple = (0.0, 0.25, 0.5, 0.75)
    pipelines: tuple = ("sparql",)
    client: str = "scripted"
    replay_path: Optional[str] = None
    replay_strict: bool = True
    hint: bool = False
    llm_url: Optional[str] = None
    llm_model: str = "gpt-4-0613"
    llm_timeout: float = 60.0
    llm_max_retries: int = 3
    max_in_flight: int = 4
    embedder: str = "lexical"
    embed_dim: int = 4096
    embed_ngram: int = 3
    embed_url: Optional[str] = None
    seed: int = 0
    out: Optional[str] = None
    questions: Optional[str] = None
    n_per_family: int = 20
    difficulties: tuple = ("Easy", "Medium", "Difficult")
    transcript: Optional[str] = None

    def validate(self) -> "Config":
        try:
            parse_policy(self.policy)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        for lvl in self.sparsity_levels:
            if not 0.0 <= lvl <= 1.0:
                raise ConfigError(f"sparsity level {lvl} outside [0, 1]")
        for p in self.pipelines:
            if p not in PIPELINES:
                raise ConfigError(f"unknown pipeline {p!r} (choose from {', '.join(PIPELINES)})")
        if self.client not in CLIENTS:
            raise ConfigError(f"unknown client {self.client!r}")
        if self.client == "replay" and not self.replay_path:
            raise ConfigError("client = replay needs replay_path")
        if self.embedder not in EMBEDDERS:
            raise ConfigError(f"unknown embedder {self.embedder!r}")
        if self.embed_dim < 64 or not 2 <= self.embed_ngram <= 5:
            raise ConfigError("embed_dim must be >= 64 and embed_ngram in [2, 5]")
        if self.n_per_family < 1 or self.max_in_flight < 1 or self.llm_max_retries < 0:
            raise ConfigError("n_per_family and max_in_flight must be positive, llm_max_retries >= 0")
        for d in self.difficulties:
            try:
                Difficulty.parse(d)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        return self

    def with_overrides(self, **overrides) -> "Config":
        clean = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **clean).validate()

    def gazetteer_path(self) -> Optional[Path]:
        if self.gazetteer is None:
            return None
        if self.gazetteer in BUILTIN_GAZETTEERS:
            ref = resources.files("distrag.data").joinpath(BUILTIN_GAZETTEERS[self.gazetteer])
            return Path(str(ref))
        return Path(self.gazetteer)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _list(text: str) -> tuple:
    return tuple(p.strip() for p in text.split(",") if p.strip())


_CONVERTERS = {
    "k": int,
    "sparsity_levels": lambda t: tuple(float(x) for x in _list(t)),
    "pipelines": lambda t: tuple(x.lower() for x in _list(t)),
    "replay_strict": _bool,
    "hint": _bool,
    "llm_timeout": float,
    "llm_max_retries": int,
    "max_in_flight": int,
    "embed_dim": int,
    "embed_ngram": int,
    "seed": int,
    "n_per_family": int,
    "difficulties": _list,
}
_ALIASES = {"pipeline": "pipelines", "levels": "sparsity_levels"}


def parse_config(text: str) -> Config:
    known = {f.name for f in fields(Config)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key = _ALIASES.get(key.strip(), key.strip())
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        value = value.strip()
        try:
            values[key] = _CONVERTERS.get(key, str)(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    return Config(**values).validate()


def load_config(path) -> Config:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
