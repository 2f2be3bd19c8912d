"""Prompt templates (shipped as resource files) and their rendering."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Optional

from distrag.errors import MissingSlot, UnknownSlot
from distrag.questions import Difficulty
from distrag.turtle import encode_local

_SLOT = re.compile(r"\{(\w+)\}")


class TemplateId(str, enum.Enum):
    VECTOR = "vector"
    SPARQL = "sparql"
    BASELINE = "baseline"


@dataclass(frozen=True)
class PromptTemplate:
    id: TemplateId
    body: str

    @property
    def slots(self) -> frozenset:
        return frozenset(_SLOT.findall(self.body))


@lru_cache(maxsize=None)
def load_template(template_id) -> PromptTemplate:
    template_id = TemplateId(template_id)
    body = (
        resources.files("distrag.llm")
        .joinpath("templates", f"{template_id.value}.txt")
        .read_text(encoding="utf-8")
    )
    return PromptTemplate(template_id, body)


def render_prompt(t: PromptTemplate, bindings: dict) -> str:
    for name in bindings:
        if name not in t.slots:
            raise UnknownSlot(name)
    for name in sorted(t.slots):
        if name not in bindings:
            raise MissingSlot(name)
    # single pass, so braces inside bound values are never re-expanded
    return _SLOT.sub(lambda m: str(bindings[m.group(1)]), t.body)


HINT_HEADING = " ### Query Template:"
_QUESTION_HEADING = " ### Question:"
_PLACEHOLDERS = ("A", "B", "C")

EASY_SKELETON = """PREFIX ns1: <http://example.org/cities#>
SELECT ?distance WHERE {
  {A} ns1:distanceTo [ ns1:destination {B} ; ns1:distance ?distance ] .
}"""

MEDIUM_SKELETON = """PREFIX ns1: <http://example.org/cities#>
SELECT ?distance WHERE {
  {A} ns1:distanceTo [ ns1:destination ?city ; ns1:distance ?distance ] .
}
ORDER BY ASC(?distance)
LIMIT 1"""

DIFFICULT_SKELETON = """PREFIX ns1: <http://example.org/cities#>
SELECT ?city WHERE {
  {A} ns1:distanceTo [ ns1:destination {B} ; ns1:distance ?target ] .
  {C} ns1:distanceTo [ ns1:destination ?city ; ns1:distance ?distance ] .
  FILTER(?city != {A} && ?city != {B})
}
ORDER BY ASC(ABS(?distance - ?target))
LIMIT 1"""


def city_term(display_name: str) -> str:
    return "ns1:" + encode_local(display_name)


@dataclass(frozen=True)
class QueryTemplateHint:
    """Per-family SPARQL skeletons with ``{A}``, ``{B}``, ``{C}`` placeholders."""

    easy: Optional[str] = EASY_SKELETON
    medium: Optional[str] = MEDIUM_SKELETON
    difficult: Optional[str] = DIFFICULT_SKELETON

    def skeleton(self, difficulty) -> Optional[str]:
        return {
            Difficulty.EASY: self.easy,
            Difficulty.MEDIUM: self.medium,
            Difficulty.DIFFICULT: self.difficult,
        }[Difficulty.parse(difficulty)]

    def instantiate(self, difficulty, names) -> Optional[str]:
        skel = self.skeleton(difficulty)
        if skel is None:
            return None
        return instantiate_skeleton(skel, names)


def instantiate_skeleton(skeleton: str, names) -> str:
    out = skeleton
    for placeholder, name in zip(_PLACEHOLDERS, names):
        out = out.replace("{" + placeholder + "}", city_term(name))
    return out


def skeleton_for_prompt(skeleton: str) -> str:
    """Show placeholders as ``ns1:CITY_A`` so the prompt carries no ``{...}``."""
    out = skeleton
    for p in _PLACEHOLDERS:
        out = out.replace("{" + p + "}", f"ns1:CITY_{p}")
    return out


def skeleton_from_prompt(text: str) -> str:
    out = text
    for p in _PLACEHOLDERS:
        out = re.sub(rf"ns1:CITY_{p}(?![\w\\%-])", "{" + p + "}", out)
    return out


def render_sparql_prompt(question: str, hint_skeleton: Optional[str] = None) -> str:
    prompt = render_prompt(load_template(TemplateId.SPARQL), {"question": question})
    if hint_skeleton is None:
        return prompt
    section = HINT_HEADING + "\n" + skeleton_for_prompt(hint_skeleton) + "\n"
    at = prompt.rfind(_QUESTION_HEADING)
    return prompt[:at] + section + prompt[at:]


def hint_from_prompt(prompt: str) -> Optional[str]:
    at = prompt.find(HINT_HEADING)
    if at < 0:
        return None
    body = prompt[at + len(HINT_HEADING):]
    end = body.find(_QUESTION_HEADING)
    if end >= 0:
        body = body[:end]
    return skeleton_from_prompt(body.strip("\n"))


_QUESTION_LINE = re.compile(r"^\s*(?:###\s*)?Question:\s*(.*?)(?:\s+Answer:)?\s*$", re.MULTILINE)


def question_from_prompt(prompt: str) -> Optional[str]:
    matches = _QUESTION_LINE.findall(prompt)
    return matches[-1] if matches else None
