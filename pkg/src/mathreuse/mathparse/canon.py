"""Synonym canonicalization driven by the shipped table ``data/canonical.json``."""

from __future__ import annotations

import json
import re
from dataclasses import replace
from functools import lru_cache
from importlib import resources
from typing import Optional

from .lexer import RELATOR_CANON
from .nodes import ExprNode, FuncApply, Identifier, Number, OpApply, Relation, Scripted, Sequence, transform

__all__ = ["CanonTable", "load_canon_table", "normalize", "synonym_swaps"]


class CanonTable:
    def __init__(self, data: dict):
        self.version = data["version"]
        self.entries = {e["name"]: e for e in data["entries"]}

    def has(self, name: str) -> bool:
        return name in self.entries

    def get(self, name: str, key: str, default=None):
        return self.entries.get(name, {}).get(key, default)


@lru_cache(maxsize=None)
def load_canon_table(path: Optional[str] = None) -> CanonTable:
    if path is None:
        text = resources.files("mathreuse.data").joinpath("canonical.json").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return CanonTable(json.loads(text))


_DECIMAL = re.compile(r"^(\d*)\.(\d+)$")


def collapse_decimal(value: str) -> str:
    m = _DECIMAL.match(value)
    if not m:
        return value
    whole, frac = m.group(1) or "0", m.group(2).rstrip("0")
    whole = whole.lstrip("0") or "0"
    return f"{whole}.{frac}" if frac else whole


def _is_half(node: Optional[ExprNode]) -> bool:
    if isinstance(node, Number):
        return node.value == "0.5"
    return (isinstance(node, OpApply) and node.op == "/" and not node.is_fence
            and node.operands == (Number("1"), Number("2")))


def _rewrite(node: ExprNode, table: CanonTable) -> ExprNode:
    if isinstance(node, Number) and table.has("decimal-collapse"):
        value = collapse_decimal(node.value)
        return node if value == node.value else replace(node, value=value)
    if isinstance(node, Identifier):
        return node if node.text is None else replace(node, text=None)
    if isinstance(node, OpApply):
        if node.is_fence:
            fences = table.get("drop-grouping", "fences", ())
            if node.op in fences and len(node.operands) == 1 \
                    and not isinstance(node.operands[0], Sequence):
                return node.operands[0]
            return node
        if len(node.operands) == 2 and node.op in table.get("cdot-juxtaposition", "ops", ()):
            return replace(node, op="")
        return node
    if isinstance(node, FuncApply):
        if node.head in table.get("fraction-slash", "commands", ()) and len(node.args) == 2:
            return OpApply("/", node.args, span=node.span)
        return node
    if isinstance(node, Scripted):
        if table.has("half-power-sqrt") and node.sub is None and _is_half(node.sup):
            return FuncApply("\\sqrt", (node.base,), "brace", span=node.span)
        return node
    if isinstance(node, Relation):
        spelling = table.get("relator-spelling", "map")
        if spelling:
            rels = tuple(spelling.get(RELATOR_CANON.get(r, r), r) for r in node.relators)
            if rels != node.relators:
                return replace(node, relators=rels)
        return node
    if isinstance(node, Sequence):
        marks = table.get("trailing-punctuation", "marks", ())
        if len(node.items) == 1 and len(node.separators) == 1 and node.separators[0] in marks:
            return node.items[0]
        return node
    return node


def normalize(expr: ExprNode, table: Optional[CanonTable] = None) -> ExprNode:
    """Rewrite ``expr`` to the canonical representative of its synonym class.

    The result is a fixed point: ``normalize(normalize(e)) == normalize(e)``.
    """
    table = table or load_canon_table()
    current = expr
    for _ in range(16):
        nxt = transform(current, lambda n: _rewrite(n, table))
        if nxt == current:
            return nxt
        current = nxt
    return current


def synonym_swaps(node: ExprNode) -> list[tuple[str, ExprNode]]:
    """Alternative presentations of ``node`` itself (not its subtrees).

    Each entry is ``(entry name, replacement)``; every replacement normalizes
    to the same tree as ``node`` does.
    """
    out: list[tuple[str, ExprNode]] = []
    if isinstance(node, Number) and node.value.isdigit():
        out.append(("decimal-collapse", replace(node, value=node.value + ".0")))
    elif isinstance(node, OpApply) and not node.is_fence and len(node.operands) == 2:
        if node.op == "/":
            out.append(("fraction-slash", FuncApply("\\frac", node.operands, "brace", span=node.span)))
        elif node.op == "":
            out.append(("cdot-juxtaposition", replace(node, op="\\cdot")))
    elif isinstance(node, FuncApply) and node.head == "\\sqrt" and len(node.args) == 1:
        half = OpApply("/", (Number("1"), Number("2")))
        out.append(("half-power-sqrt", Scripted(node.args[0], None, half, span=node.span)))
    return out
