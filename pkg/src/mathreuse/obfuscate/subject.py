"""Variation of subject: simultaneous entity substitution in text and formulas."""

from __future__ import annotations

import re
from typing import Mapping

from ..docmodel import Document, MathRun, ObfuscationOperator, TextRun
from ..mathparse import identifier_leaves, walk
from .edits import Edit, ObfuscationTrace, apply_edits
from .paraphrase import phrase_pattern

__all__ = ["AmbiguityError", "apply_variation_of_subject", "entity_token_count"]


class AmbiguityError(ValueError):
    pass


def apply_variation_of_subject(passage: Document, entity_map: Mapping[str, str],
                               seed: int = 0) -> tuple[Document, ObfuscationTrace]:
    """Replace every occurrence of each key by its image.

    Text occurrences are matched as whole words; in formulas a key matches
    identifier leaves of the same name.  A key that is also an image is
    rejected, which keeps the substitution simultaneous.
    """
    clash = sorted(set(entity_map) & set(entity_map.values()))
    if clash:
        raise AmbiguityError(f"{clash[0]!r} is both replaced and a replacement")
    edits: list[Edit] = []
    pattern = phrase_pattern(entity_map)
    for run in passage.runs:
        if isinstance(run, TextRun) and pattern is not None:
            for m in pattern.finditer(run.text):
                edits.append(Edit(run.start + m.start(), run.start + m.end(),
                                  entity_map[m.group(0)], f"entity:{m.group(0)}"))
        elif isinstance(run, MathRun) and run.tree is not None:
            for leaf in identifier_leaves(run.tree):
                if leaf.name in entity_map and leaf.span is not None:
                    edits.append(Edit(leaf.span[0], leaf.span[1], entity_map[leaf.name],
                                      f"entity:{leaf.name}"))
    return apply_edits(passage, edits, ObfuscationOperator.VS, seed)


_WORD = re.compile(r"\w+|[^\w\s]")


def entity_token_count(doc: Document, entities) -> int:
    """Tokens of ``doc`` with each entity phrase counted once: words and
    punctuation of text runs plus the tree nodes of each formula."""
    pattern = phrase_pattern(entities)
    total = 0
    for run in doc.runs:
        if isinstance(run, TextRun):
            text = pattern.sub(" \0 ", run.text) if pattern is not None else run.text
            total += len(_WORD.findall(text.replace("\0", "_")))
        elif run.tree is not None:
            total += sum(1 for _ in walk(run.tree))
        else:
            total += len(_WORD.findall(run.latex))
    return total
