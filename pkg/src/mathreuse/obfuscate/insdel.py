"""Insertions and deletions of insubstantial content.

Insertable units are intermediate steps of relation chains (one rule
application away from the preceding operand) and filler sentences from the
lexicon.  Deletion removes units of exactly these two kinds, so deleting at
the site of an insertion restores the passage.
"""

from __future__ import annotations

import random
import re
from typing import Optional, Sequence

from ..docmodel import Document, ObfuscationOperator, TextRun
from ..mathparse import ExprNode, Relation, normalize, render
from .edits import Edit, ObfuscationTrace, apply_edits
from .library import Lexicon, RewriteRule, load_lexicon, load_rules, rule_sites
from .paraphrase import statements
from .treeops import replace_at

__all__ = ["apply_insert_delete", "id_library", "one_step_rewrites"]

_SENTENCE_END = re.compile(r"[.!?](?=\s|$)")


def id_library() -> list[RewriteRule]:
    """Default chain-step library: the ID-tagged rules plus the numerically
    checked FM rules that act inside an expression."""
    return [r for r in load_rules()
            if r.operator_tag is ObfuscationOperator.ID
            or (r.numeric and not r.params and not r.post)]


def one_step_rewrites(expr: ExprNode, library: Sequence[RewriteRule]) -> list[tuple[str, ExprNode]]:
    base = normalize(expr)
    out = []
    for rule, path, binding in rule_sites(base, list(library)):
        if isinstance(base, Relation) or rule.params:
            continue
        new = normalize(replace_at(base, path, rule.apply(binding)))
        if new != base:
            out.append((rule.name, new))
    return out


def _chain_links(doc: Document):
    for run in doc.math_runs():
        if run.tree is None:
            continue
        for stmt in statements(run.tree):
            if isinstance(stmt, Relation):
                yield stmt


def _insert_sites(doc: Document, library, fillers, site: str) -> list[Edit]:
    sites: list[Edit] = []
    if site in ("auto", "chain"):
        for rel in _chain_links(doc):
            for k, left in enumerate(rel.operands[:-1]):
                if left.span is None:
                    continue
                for name, step in one_step_rewrites(left, library):
                    sites.append(Edit(left.span[1], left.span[1], "=" + render(step), f"chain-step:{name}"))
    if site == "filler" or (site == "auto" and not sites):
        boundaries = []
        text_runs = [r for r in doc.runs if isinstance(r, TextRun)]
        for run in text_runs:
            boundaries += [run.start + m.end() for m in _SENTENCE_END.finditer(run.text)]
        if not boundaries and text_runs:
            boundaries.append(text_runs[-1].end)
        for pos in boundaries:
            for k, filler in enumerate(fillers):
                sites.append(Edit(pos, pos, " " + filler, f"filler:{k}"))
    return sites


def _delete_sites(doc: Document, library, fillers) -> list[Edit]:
    sites: list[Edit] = []
    for rel in _chain_links(doc):
        ops = rel.operands
        for k in range(len(ops) - 2):
            if rel.relators[k] != "=" or ops[k].span is None or ops[k + 1].span is None:
                continue
            target = normalize(ops[k + 1])
            for name, step in one_step_rewrites(ops[k], library):
                if step == target:
                    sites.append(Edit(ops[k].span[1], ops[k + 1].span[1], "", f"chain-step:{name}"))
                    break
    for run in doc.runs:
        if not isinstance(run, TextRun):
            continue
        for k, filler in enumerate(fillers):
            needle = " " + filler
            pos = run.text.find(needle)
            while pos >= 0:
                sites.append(Edit(run.start + pos, run.start + pos + len(needle), "", f"filler:{k}"))
                pos = run.text.find(needle, pos + len(needle))
    return sorted(set(sites))


def apply_insert_delete(passage: Document, mode: str = "insert",
                        library: Optional[Sequence[RewriteRule]] = None, seed: int = 0,
                        lexicon: Optional[Lexicon] = None, site: str = "auto",
                        count: int = 1) -> tuple[Document, ObfuscationTrace]:
    """Insert or delete up to ``count`` insubstantial units at seed-chosen sites.

    ``site`` restricts insertions to ``chain`` steps or ``filler`` sentences;
    ``auto`` prefers chain steps.  No applicable site leaves the passage as is.
    """
    if mode not in ("insert", "delete"):
        raise ValueError(f"mode must be insert or delete, got {mode!r}")
    if site not in ("auto", "chain", "filler"):
        raise ValueError(f"site must be auto, chain or filler, got {site!r}")
    library = id_library() if library is None else list(library)
    fillers = (lexicon or load_lexicon()).fillers
    rng = random.Random(seed)
    if mode == "insert":
        candidates = _insert_sites(passage, library, fillers, site)
    else:
        candidates = _delete_sites(passage, library, fillers)
    chosen: list[Edit] = []
    while candidates and len(chosen) < count:
        e = candidates.pop(rng.randrange(len(candidates)))
        if not any(e.start <= c.end and c.start <= e.end for c in chosen):
            chosen.append(e)
    return apply_edits(passage, chosen, ObfuscationOperator.ID, seed)
