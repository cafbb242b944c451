"""Parsers for the line and fence conventions the stage prompts demand."""

from __future__ import annotations

import json
import re

from ..errors import MalformedModelOutput
from .types import FilterVerdict

_NUMBERED_LINE = re.compile(r"^\s*\d+[.)]\s+(.+?)\s*$")
_FENCED_BLOCK = re.compile(r"```[a-zA-Z0-9_-]*\n(.*?)```", re.DOTALL)
_VERDICT = re.compile(r"^\W*(yes|no)\b", re.IGNORECASE)
_STRUCTURAL_ITEM = re.compile(r"^\[(format|numeric)\]\s*(.+)$")
_ADHERENCE = re.compile(r"(?im)^\s*(?:\*{0,2})constraint adherence\s*:?")


def normalize_ws(text: str) -> str:
    """Collapse runs of whitespace; used for duplicate detection."""
    return " ".join(text.split())


def numbered_items(text: str) -> list[str]:
    """Extract the payload of every ``1.``/``1)`` line, in order."""
    items = [m.group(1) for line in text.splitlines() if (m := _NUMBERED_LINE.match(line))]
    if not items:
        raise MalformedModelOutput("expected a numbered list, found none", raw=text)
    return items


def fenced_block(text: str) -> str:
    """Content of the first fenced code block."""
    match = _FENCED_BLOCK.search(text)
    if not match:
        raise MalformedModelOutput("expected a fenced block, found none", raw=text)
    body = match.group(1).strip()
    if not body:
        raise MalformedModelOutput("fenced block is empty", raw=text)
    return body


def fenced_json(text: str):
    """JSON payload from a fenced block, falling back to bare JSON text."""
    match = _FENCED_BLOCK.search(text)
    candidate = match.group(1) if match else text.strip()
    if not match and not candidate.startswith(("[", "{")):
        raise MalformedModelOutput("expected fenced JSON, found none", raw=text)
    try:
        return json.loads(candidate)
    except json.JSONDecodeError as exc:
        raise MalformedModelOutput(f"invalid JSON: {exc}", raw=text) from exc


def parse_verdict(text: str) -> FilterVerdict:
    """Yes/No judge verdict; the full response is kept as the verbatim rationale."""
    match = _VERDICT.match(text)
    if not match:
        raise MalformedModelOutput("judge response does not start with Yes/No", raw=text)
    reason = text.strip()
    return FilterVerdict(keep=match.group(1).lower() == "yes", reason=reason)


def parse_yes_no(text: str) -> bool:
    """Strict boolean parse for binary judges."""
    match = _VERDICT.match(text)
    if not match:
        raise MalformedModelOutput("expected a Yes/No answer", raw=text)
    return match.group(1).lower() == "yes"


def parse_constraint_categories(text: str) -> list[tuple[str, tuple[str, ...]]]:
    """Parse ``N. Category: item; item`` lines into (name, items) pairs.

    Duplicate category names are merged (items unioned, order preserved);
    duplicate items within a category are dropped. Item-count validation is
    the caller's call, so thin categories surface as contract errors rather
    than type errors.
    """
    merged: dict[str, list[str]] = {}
    order: list[str] = []
    for entry in numbered_items(text):
        name, sep, items_blob = entry.partition(":")
        if not sep:
            raise MalformedModelOutput(f"constraint line lacks ':' separator: {entry!r}", raw=text)
        name = name.strip()
        if not name:
            raise MalformedModelOutput(f"constraint line lacks a category name: {entry!r}", raw=text)
        items = [item.strip() for item in items_blob.split(";") if item.strip()]
        if name not in merged:
            merged[name] = []
            order.append(name)
        for item in items:
            if item not in merged[name]:
                merged[name].append(item)
    return [(name, tuple(merged[name])) for name in order]


def parse_structural_candidates(text: str) -> list[tuple[str, str]]:
    """Parse ``N. [format|numeric] text`` lines into (kind, text) pairs."""
    pairs = []
    for entry in numbered_items(text):
        match = _STRUCTURAL_ITEM.match(entry)
        if not match:
            raise MalformedModelOutput(
                f"structural constraint lacks a [format]/[numeric] tag: {entry!r}", raw=text
            )
        pairs.append((match.group(1), match.group(2).strip()))
    return pairs


def parse_ladder_levels(text: str) -> list[dict]:
    """Level dicts from the fenced-JSON ladder convention."""
    data = fenced_json(text)
    if not isinstance(data, list) or not data:
        raise MalformedModelOutput("ladder JSON must be a non-empty array", raw=text)
    levels = []
    for i, entry in enumerate(data):
        if not isinstance(entry, dict):
            raise MalformedModelOutput(f"ladder entry {i} is not an object", raw=text)
        try:
            difficulty = int(entry["difficulty"])
            level_text = str(entry["text"])
            applied_raw = entry.get("applied", [])
            applied = [(str(pair[0]), str(pair[1])) for pair in applied_raw]
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise MalformedModelOutput(f"ladder entry {i} is malformed: {exc}", raw=text) from exc
        if not level_text.strip():
            raise MalformedModelOutput(f"ladder entry {i} has empty text", raw=text)
        levels.append({"difficulty": difficulty, "text": level_text, "applied": applied})
    return levels


def has_adherence_section(text: str) -> bool:
    return bool(_ADHERENCE.search(text))
