"""Different presentation: consistent identifier renaming plus synonym swaps."""

from __future__ import annotations

import random
import string
from dataclasses import replace
from typing import Mapping, Optional

from ..docmodel import Document, ObfuscationOperator
from ..mathparse import ExprNode, Identifier, identifiers, render, synonym_swaps, transform
from ..mathparse.lexer import GREEK
from ..mathparse.parser import is_function_head
from .edits import Edit, ObfuscationTrace, TraceEdit, apply_edits
from .treeops import replace_at, subtrees

__all__ = ["RenameError", "apply_presentation", "full_rename", "present_document", "rename_identifiers"]


class RenameError(ValueError):
    pass


def _check_bijective(rename: Mapping[str, str], names: set[str]) -> None:
    images = list(rename.values())
    if len(set(images)) != len(images):
        raise RenameError("rename is not injective")
    total = [rename.get(n, n) for n in sorted(names)]
    if len(set(total)) != len(total):
        clash = sorted(n for n in names if n not in rename and n in set(images))
        raise RenameError(f"rename collides with the unmapped identifier {clash[0] if clash else '?'}")


def rename_identifiers(tree: ExprNode, rename: Mapping[str, str]) -> ExprNode:
    def fn(n: ExprNode) -> ExprNode:
        if isinstance(n, Identifier) and n.name in rename:
            return replace(n, name=rename[n.name], text=None)
        return n
    return transform(tree, fn)


def apply_presentation(formula: ExprNode, rename: Optional[Mapping[str, str]] = None,
                       synonyms: bool = True, seed: int = 0,
                       swaps: int = 1) -> tuple[ExprNode, ObfuscationTrace]:
    """Rename identifiers through a bijection, then make up to ``swaps``
    seed-chosen synonym swaps (``1`` to ``1.0``, ``a/b`` to ``\\frac{a}{b}``, ...)."""
    rename = dict(rename or {})
    _check_bijective(rename, set(identifiers(formula)))
    rng = random.Random(seed)
    edits: list[TraceEdit] = []
    out = rename_identifiers(formula, rename)
    for _, node in subtrees(formula):
        if isinstance(node, Identifier) and node.name in rename:
            span = node.span or (0, 0)
            edits.append(TraceEdit(span, span, f"rename:{node.name}->{rename[node.name]}"))
    if synonyms and swaps > 0:
        sites = [(path, alt) for path, node in subtrees(out) for alt in synonym_swaps(node)]
        chosen: list[tuple] = []
        for path, (entry, new) in rng.sample(sites, len(sites)):
            if len(chosen) >= swaps:
                break
            if any(path[:len(p)] == p or p[:len(path)] == path for p, _, _ in chosen):
                continue  # nested sites would undo each other
            chosen.append((path, entry, new))
        for path, entry, new in sorted(chosen, key=lambda c: c[0], reverse=True):
            out = replace_at(out, path, new)
            edits.append(TraceEdit((0, 0), (0, 0), f"synonym:{entry}"))
    return out, ObfuscationTrace(ObfuscationOperator.DP, tuple(edits), seed)


def full_rename(names, avoid=()) -> dict[str, str]:
    """Map every name to a fresh one outside ``names`` and ``avoid``.

    Function-head names (``f``, ``g``, ``h``, capitals) go to other
    function-head names so that applications still parse as applications.
    """
    taken = set(names) | set(avoid)
    heads = [c for c in string.ascii_uppercase] + ["f", "g", "h"]
    plain = [c for c in string.ascii_lowercase if c not in "fgh"]
    plain += ["\\" + g for g in sorted(GREEK) if g[0].islower()]
    plain += [f"{c}_{k}" for k in range(1, 10) for c in "uvwxyz"]
    heads += [f"{c}_{k}" for k in range(1, 10) for c in "FGH"]
    pools = {True: [h for h in heads if h not in taken], False: [p for p in plain if p not in taken]}
    out: dict[str, str] = {}
    for name in sorted(set(names)):
        pool = pools[is_function_head(Identifier(name))]
        if not pool:
            raise RenameError("no fresh identifier left for a full rename")
        out[name] = pool.pop(0)
    return out


def present_document(doc: Document, rename: Optional[Mapping[str, str]] = None, full: bool = False,
                     seed: int = 0, swaps: int = 1) -> tuple[Document, ObfuscationTrace]:
    """Apply one rename to every formula of ``doc`` plus per-formula synonym swaps."""
    names = sorted({n for r in doc.math_runs() if r.tree is not None for n in identifiers(r.tree)})
    mapping = full_rename(names) if full else dict(rename or {})
    rng = random.Random(seed)
    edits = []
    for run in doc.math_runs():
        if run.tree is None:
            continue
        new, trace = apply_presentation(run.tree, mapping, swaps > 0, rng.randrange(2**32), swaps)
        if new != run.tree:
            edits.append(Edit(run.content_start, run.content_end, render(new),
                              ";".join(sorted({e.rule for e in trace.edits})) or "present"))
    return apply_edits(doc, edits, ObfuscationOperator.DP, seed)
