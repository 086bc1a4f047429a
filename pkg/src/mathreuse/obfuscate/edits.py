"""Edit lists over raw document text and the traces they leave."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from ..docmodel import Document, ObfuscationOperator, segment_document

__all__ = ["Edit", "TraceEdit", "ObfuscationTrace", "apply_edits", "map_position"]


@dataclass(frozen=True, order=True)
class Edit:
    """Replace ``raw[start:end]`` by ``text``; ``rule`` names the lexicon or rule entry."""

    start: int
    end: int
    text: str
    rule: str = ""


@dataclass(frozen=True)
class TraceEdit:
    original: tuple[int, int]
    replacement: tuple[int, int]
    rule: str
    text: str = ""


@dataclass(frozen=True)
class ObfuscationTrace:
    operator: ObfuscationOperator
    edits: tuple[TraceEdit, ...] = ()
    seed: int = 0
    skipped: tuple[str, ...] = field(default=(), compare=False)

    def __bool__(self) -> bool:
        return bool(self.edits)


def apply_edits(doc: Document, edits: Iterable[Edit], operator: ObfuscationOperator, seed: int,
                skipped: Iterable[str] = ()) -> tuple[Document, ObfuscationTrace]:
    """Apply non-overlapping edits to ``doc`` and re-segment the result."""
    ordered = sorted(e for e in edits if doc.raw[e.start:e.end] != e.text)
    for prev, cur in zip(ordered, ordered[1:]):
        if cur.start < prev.end or (cur.start == prev.start == prev.end == cur.end):
            raise ValueError(f"overlapping edits at {prev.start}-{prev.end} and {cur.start}-{cur.end}")
    parts, trace, pos, shift = [], [], 0, 0
    for e in ordered:
        parts.append(doc.raw[pos:e.start])
        parts.append(e.text)
        new_start = e.start + shift
        trace.append(TraceEdit((e.start, e.end), (new_start, new_start + len(e.text)), e.rule, e.text))
        shift += len(e.text) - (e.end - e.start)
        pos = e.end
    parts.append(doc.raw[pos:])
    new = segment_document(doc.id, "".join(parts))
    return new, ObfuscationTrace(operator, tuple(trace), seed, tuple(skipped))


def map_position(pos: int, edits: Iterable[TraceEdit], right: bool) -> int:
    """Where original offset ``pos`` lands after the edits.

    Positions inside a replaced region snap to its replacement boundary; an
    insertion exactly at ``pos`` is placed before it when ``right`` is true
    (so a right boundary absorbs it) and after it otherwise.
    """
    shift = 0
    for e in edits:
        (o0, o1), (r0, r1) = e.original, e.replacement
        if o1 < pos or (o1 == pos and (o0 < o1 or right)):
            shift = r1 - o1
            continue
        if o0 < pos < o1:
            return r1 if right else r0
        if o0 == pos and o1 > pos:
            return r0
        break
    return pos + shift
