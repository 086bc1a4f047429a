"""Structural queries: maximal expressions, identifier streams, alpha-equivalence."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .lexer import MIRROR, RELATOR_CANON
from .nodes import (
    ExprNode, FuncApply, Identifier, Number, OpApply, Relation, Scripted, Sequence,
    contains_relation, walk,
)

__all__ = [
    "RelatorKind", "relator_kind", "maximal_expressions", "identifiers",
    "identifier_leaves", "alpha_equivalent",
]


@dataclass(frozen=True)
class RelatorKind:
    symbol: str
    mirror: Optional[str]


def relator_kind(lexeme: str) -> RelatorKind:
    symbol = RELATOR_CANON[lexeme]
    return RelatorKind(symbol, MIRROR.get(symbol))


def maximal_expressions(formula: ExprNode) -> list[ExprNode]:
    """Relation-free subtrees that cannot grow without absorbing a relator.

    For a relation ``a+2=0`` these are ``a+2`` and ``0``; a relation-free
    formula is its own single maximal expression.  Statement lists and
    relations nested inside groups are descended into.
    """
    if not contains_relation(formula):
        return [formula]
    out: list[ExprNode] = []
    for child in formula.children():
        out.extend(maximal_expressions(child))
    return out


def identifier_leaves(formula: ExprNode) -> list[Identifier]:
    return [n for n in walk(formula) if isinstance(n, Identifier)]


def identifiers(formula: ExprNode) -> list[str]:
    """Identifier names in source order, duplicates kept."""
    return [n.name for n in identifier_leaves(formula)]


def alpha_equivalent(e1: ExprNode, e2: ExprNode) -> Optional[dict[str, str]]:
    """Bijective renaming of identifiers taking ``e1`` to ``e2``, or ``None``.

    Both trees should already be normalized.  The mapping covers every
    identifier name of ``e1`` (unchanged names map to themselves).
    """
    fwd: dict[str, str] = {}
    bwd: dict[str, str] = {}

    def bind(a: str, b: str) -> bool:
        if fwd.setdefault(a, b) != b:
            return False
        return bwd.setdefault(b, a) == a

    def same(a: ExprNode, b: ExprNode) -> bool:
        if type(a) is not type(b):
            return False
        if isinstance(a, Identifier):
            return bind(a.name, b.name)
        if isinstance(a, Number):
            return a.value == b.value
        if isinstance(a, Relation):
            if a.relators != b.relators:
                return False
        elif isinstance(a, OpApply):
            if a.op != b.op or a.close != b.close:
                return False
        elif isinstance(a, FuncApply):
            if isinstance(a.head, str) or isinstance(b.head, str):
                if a.head != b.head:
                    return False
        elif isinstance(a, Scripted):
            if (a.sub is None) != (b.sub is None) or (a.sup is None) != (b.sup is None):
                return False
        elif isinstance(a, Sequence):
            if a.separators != b.separators:
                return False
        ca, cb = a.children(), b.children()
        return len(ca) == len(cb) and all(same(x, y) for x, y in zip(ca, cb))

    return fwd if same(e1, e2) else None
