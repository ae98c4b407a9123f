"""Minimal AIML-subset dialogue interpreter for the environment's help
assistant.

Category files are XML documents of ``<category><pattern>...</pattern>
<template>...</template></category>`` entries.  Patterns are uppercase words
and ``*`` wildcards; templates mix text with ``<star/>`` slots (optionally
``<star index="n"/>``) and at most one ``<srai>`` redirect.

Matching: input is normalized (punctuation stripped, case folded for
comparison; original casing kept for star bindings).  ``*`` consumes one or
more words, binding leftmost-shortest.  Among matching categories the one
with the fewest wildcards wins, ties broken by lexicographically smallest
pattern, so exact patterns always beat wildcards.  ``<srai>`` re-enters
matching with the rewritten text, capped at depth 8.  No match returns the
brain's fallback text.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

from .errors import BrainParseError, DuplicatePattern

DEFAULT_FALLBACK = "Sorry, I don't know about that yet. Try HELP for an overview."

SRAI_DEPTH_LIMIT = 8

_WORD = re.compile(r"[A-Za-z0-9]+")

#: Template parts: ("text", str) | ("star", index) | ("srai", [parts])
TemplatePart = tuple


@dataclass(frozen=True)
class Category:
    pattern: tuple[str, ...]          # uppercase words and "*"
    template: tuple[TemplatePart, ...]
    pattern_text: str

    @property
    def wildcards(self) -> int:
        return sum(1 for token in self.pattern if token == "*")


@dataclass
class Brain:
    categories: list[Category] = field(default_factory=list)
    fallback: str = DEFAULT_FALLBACK

    def __len__(self) -> int:
        return len(self.categories)


def _tokenize_input(text: str) -> list[str]:
    """Original-case word list; punctuation separates, never matches."""
    return _WORD.findall(text)


def normalize(text: str) -> str:
    """Canonical input form: punctuation stripped, whitespace collapsed.

    Case folding happens at pattern-comparison time instead, so star bindings
    keep the author's casing and ``respond(brain, normalize(x))`` equals
    ``respond(brain, x)``.
    """
    return " ".join(_tokenize_input(text))


def _parse_pattern(raw: str, where: str) -> tuple[str, ...]:
    tokens = []
    for piece in raw.split():
        if piece == "*":
            tokens.append("*")
            continue
        words = _WORD.findall(piece)
        if not words or "".join(words) != piece:
            raise BrainParseError(f"{where}: pattern token {piece!r} is not a word or *")
        tokens.extend(w.upper() for w in words)
    if not tokens:
        raise BrainParseError(f"{where}: empty pattern")
    return tuple(tokens)


def _parse_template(node: ET.Element, where: str) -> tuple[TemplatePart, ...]:
    parts: list[TemplatePart] = []
    srai_count = 0

    def emit_text(text: Optional[str]) -> None:
        if text:
            parts.append(("text", text))

    emit_text(node.text)
    for child in node:
        if child.tag == "star":
            index = int(child.get("index", "1"))
            if index < 1:
                raise BrainParseError(f"{where}: star index must be >= 1")
            parts.append(("star", index))
        elif child.tag == "srai":
            srai_count += 1
            if srai_count > 1:
                raise BrainParseError(f"{where}: at most one <srai> per template")
            inner: list[TemplatePart] = []
            if child.text:
                inner.append(("text", child.text))
            for sub in child:
                if sub.tag != "star":
                    raise BrainParseError(f"{where}: <srai> may only contain <star/>")
                inner.append(("star", int(sub.get("index", "1"))))
                if sub.tail:
                    inner.append(("text", sub.tail))
            parts.append(("srai", tuple(inner)))
        else:
            raise BrainParseError(f"{where}: unsupported template element <{child.tag}>")
        emit_text(child.tail)
    return tuple(parts)


def load(files: Iterable[Union[str, Path]], fallback: str = DEFAULT_FALLBACK) -> Brain:
    """Build a brain from category files; duplicate patterns are rejected."""
    brain = Brain(fallback=fallback)
    seen: dict[tuple[str, ...], str] = {}
    for path in files:
        path = Path(path)
        try:
            root = ET.fromstring(path.read_text(encoding="utf-8"))
        except ET.ParseError as err:
            line, column = err.position
            raise BrainParseError(f"{path}: malformed XML at line {line}, column {column}") from None
        for index, node in enumerate(root.iter("category")):
            where = f"{path}#category{index + 1}"
            pattern_node = node.find("pattern")
            template_node = node.find("template")
            if pattern_node is None or template_node is None:
                raise BrainParseError(f"{where}: category needs <pattern> and <template>")
            pattern = _parse_pattern((pattern_node.text or ""), where)
            if pattern in seen:
                raise DuplicatePattern(
                    f"{where}: pattern {' '.join(pattern)!r} already defined at {seen[pattern]}"
                )
            seen[pattern] = where
            brain.categories.append(Category(
                pattern=pattern,
                template=_parse_template(template_node, where),
                pattern_text=" ".join(pattern),
            ))
    return brain


def load_strings(documents: Iterable[str], fallback: str = DEFAULT_FALLBACK) -> Brain:
    """Like :func:`load` but from in-memory XML strings (used by tests)."""
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        paths = []
        for i, doc in enumerate(documents):
            p = Path(tmp) / f"brain{i}.aiml"
            p.write_text(doc, encoding="utf-8")
            paths.append(p)
        return load(paths, fallback=fallback)


def match_pattern(pattern: tuple[str, ...], words: list[str]) -> Optional[list[str]]:
    """Stars consume one or more words, binding leftmost-shortest; returns the
    star bindings (original casing) or None."""
    if not pattern:
        return [] if not words else None
    head, rest = pattern[0], pattern[1:]
    if head != "*":
        if words and words[0].upper() == head:
            return match_pattern(rest, words[1:])
        return None
    for take in range(1, len(words) + 1):
        tail = match_pattern(rest, words[take:])
        if tail is not None:
            return [" ".join(words[:take])] + tail
    return None


def _render(parts: tuple[TemplatePart, ...], stars: list[str],
            brain: Brain, depth: int) -> str:
    out = []
    for part in parts:
        kind = part[0]
        if kind == "text":
            out.append(part[1])
        elif kind == "star":
            index = part[1]
            out.append(stars[index - 1] if index <= len(stars) else "")
        else:  # srai
            rewritten = _render(part[1], stars, brain, depth)
            out.append(_respond(brain, rewritten, depth + 1))
    return "".join(out).strip()


def _respond(brain: Brain, text: str, depth: int) -> str:
    if depth > SRAI_DEPTH_LIMIT:
        return brain.fallback
    words = _tokenize_input(text)
    best: Optional[tuple[int, str, Category, list[str]]] = None
    for category in brain.categories:
        stars = match_pattern(category.pattern, words)
        if stars is None:
            continue
        key = (category.wildcards, category.pattern_text)
        if best is None or key < (best[0], best[1]):
            best = (category.wildcards, category.pattern_text, category, stars)
    if best is None:
        return brain.fallback
    return _render(best[2].template, best[3], brain, depth)


def respond(brain: Brain, text: str) -> str:
    """Deterministic, total reply for an input text."""
    return _respond(brain, text, depth=0)
