"""Pull a query out of free-form model output."""

from __future__ import annotations

import re

_FENCE = re.compile(r"```[ \t]*[\w-]*[ \t]*\n?(.*?)```", re.DOTALL)
_START = re.compile(r"\b(PREFIX|SELECT)\b", re.IGNORECASE)
_ORDER = re.compile(r"\s*ORDER\s+BY\s*", re.IGNORECASE)
_DIRECTION = re.compile(r"(ASC|DESC)\s*(?=\()", re.IGNORECASE)
_VAR = re.compile(r"[?$]\w+")
_LIMIT = re.compile(r"\s*(LIMIT|OFFSET)\s+\d+", re.IGNORECASE)


def _balanced_end(text: str, i: int, open_ch: str, close_ch: str) -> int:
    """Index just past the bracket matching ``text[i]``, or -1."""
    depth = 0
    for j in range(i, len(text)):
        ch = text[j]
        if ch == open_ch:
            depth += 1
        elif ch == close_ch:
            depth -= 1
            if depth == 0:
                return j + 1
    return -1


def _modifiers_end(text: str, pos: int) -> int:
    while True:
        m = _ORDER.match(text, pos)
        if m:
            j = m.end()
            while True:
                d = _DIRECTION.match(text, j)
                if d:
                    j = d.end()
                if j < len(text) and text[j] == "(":
                    end = _balanced_end(text, j, "(", ")")
                    if end < 0:
                        return pos
                    j = end
                else:
                    v = _VAR.match(text, j)
                    if not v:
                        break
                    j = v.end()
                nxt = re.match(r"\s+(?=[?$(]|ASC|DESC)", text[j:], re.IGNORECASE)
                if not nxt:
                    break
                j += nxt.end()
            pos = j
            continue
        m = _LIMIT.match(text, pos)
        if m:
            pos = m.end()
            continue
        return pos


def extract_query_block(llm_output: str) -> str:
    """Return the query text embedded in ``llm_output`` ('' when none)."""
    if not llm_output:
        return ""
    text = llm_output
    for block in _FENCE.findall(text):
        if _START.search(block):
            text = block
            break
    else:
        text = text.replace("```", "")
    m = _START.search(text)
    if not m:
        return ""
    start = m.start()
    brace = text.find("{", start)
    if brace < 0:
        return text[start:].strip()
    end = _balanced_end(text, brace, "{", "}")
    if end < 0:
        return text[start:].strip()
    end = _modifiers_end(text, end)
    return text[start:end].strip()
