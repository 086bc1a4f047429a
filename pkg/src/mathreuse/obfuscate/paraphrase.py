"""Paraphrasing: reworded text, mirrored relations, formulas otherwise untouched."""

from __future__ import annotations

import random
import re
from typing import Optional

from ..docmodel import Document, ObfuscationOperator
from ..mathparse import ExprNode, Relation, Sequence, render
from ..mathparse.lexer import MIRROR_LEXEME
from .edits import Edit, ObfuscationTrace, apply_edits
from .library import Lexicon

__all__ = ["InapplicableError", "mirror_relation", "apply_paraphrase", "phrase_pattern"]


class InapplicableError(ValueError):
    """An operator cannot act on the given input."""


def mirror_relation(rel: ExprNode) -> Relation:
    """Swap the operands of a relation, mirroring every relator.

    Chains are reversed as a whole: ``a<b\\leq c`` becomes ``c\\geq b>a``.
    """
    if not isinstance(rel, Relation):
        raise InapplicableError("not a relation")
    relators = []
    for r in reversed(rel.relators):
        if r not in MIRROR_LEXEME:
            raise InapplicableError(f"relator {r} has no mirror")
        relators.append(MIRROR_LEXEME[r])
    return Relation(tuple(relators), tuple(reversed(rel.operands)), span=rel.span)


def phrase_pattern(phrases) -> Optional[re.Pattern]:
    """Whole-word alternation, longest phrase first."""
    ordered = sorted(set(phrases), key=lambda p: (-len(p), p))
    if not ordered:
        return None
    return re.compile(r"(?<!\w)(?:" + "|".join(re.escape(p) for p in ordered) + r")(?!\w)")


def statements(tree: ExprNode) -> list[ExprNode]:
    """Top-level statements of a formula: the items of a statement list, or the tree."""
    return list(tree.items) if isinstance(tree, Sequence) else [tree]


def apply_paraphrase(passage: Document, lexicon: Optional[Lexicon] = None, seed: int = 0,
                     mirror: bool = True, rate: float = 1.0) -> tuple[Document, ObfuscationTrace]:
    """Reword text through phrase synonyms and mirror relations in formulas.

    Each candidate site is used with probability ``rate``; the choice of
    synonym and of sites depends only on ``seed``.
    """
    rng = random.Random(seed)
    edits: list[Edit] = []
    skipped: list[str] = []
    synonyms = lexicon.text_synonyms if lexicon else {}
    pattern = phrase_pattern(k for k, v in synonyms.items() if v)
    for run in passage.runs:
        if hasattr(run, "text") and pattern is not None:
            for m in pattern.finditer(run.text):
                if rng.random() < rate:
                    choice = rng.choice(synonyms[m.group(0)])
                    edits.append(Edit(run.start + m.start(), run.start + m.end(), choice,
                                      f"synonym:{m.group(0)}"))
        elif mirror and getattr(run, "tree", None) is not None:
            for stmt in statements(run.tree):
                if not isinstance(stmt, Relation) or stmt.span is None:
                    continue
                try:
                    flipped = mirror_relation(stmt)
                except InapplicableError as exc:
                    skipped.append(f"{stmt.span[0]}: {exc}")
                    continue
                if rng.random() < rate:
                    edits.append(Edit(stmt.span[0], stmt.span[1], render(flipped), "mirror-relation"))
    return apply_edits(passage, edits, ObfuscationOperator.P, seed, skipped)
