"""Expression tree node types.

Nodes are frozen dataclasses.  Source spans and presentation-only details
(identifier spelling such as ``x_{1}`` vs ``x_1``, argument style of a
function application) are excluded from equality, so ``==`` is structural.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Optional, Union

Span = tuple[int, int]


@dataclass(frozen=True)
class ExprNode:
    span: Optional[Span] = field(default=None, compare=False, repr=False, kw_only=True)

    def children(self) -> tuple["ExprNode", ...]:
        return ()


@dataclass(frozen=True)
class Identifier(ExprNode):
    name: str
    text: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Number(ExprNode):
    value: str


@dataclass(frozen=True)
class Relation(ExprNode):
    """``children[0] relators[0] children[1] relators[1] ...``; relators are lexemes."""

    relators: tuple[str, ...]
    operands: tuple[ExprNode, ...]

    def children(self):
        return self.operands


@dataclass(frozen=True)
class OpApply(ExprNode):
    """Operator application.

    Binary infix with two operands, prefix ``-``/``+`` or postfix ``'``/``!``
    with one.  When ``close`` is set the node is a fence: ``op`` is the
    opening delimiter and the operands sit between the delimiters.
    """

    op: str
    operands: tuple[ExprNode, ...]
    close: Optional[str] = None

    def children(self):
        return self.operands

    @property
    def is_fence(self) -> bool:
        return self.close is not None


@dataclass(frozen=True)
class FuncApply(ExprNode):
    """``head`` is an Identifier for ``f(x)`` or a command string for ``\\sin x``.

    ``style`` is one of ``paren`` (``f(x, y)``), ``brace`` (``\\frac{a}{b}``),
    ``bare`` (``\\sin x``) or ``index`` (``\\sqrt[n]{x}``, args = (x, n)).
    """

    head: Union[ExprNode, str]
    args: tuple[ExprNode, ...]
    style: str = field(default="paren", compare=False)

    def children(self):
        if isinstance(self.head, ExprNode):
            return (self.head,) + self.args
        return self.args


@dataclass(frozen=True)
class Scripted(ExprNode):
    base: ExprNode
    sub: Optional[ExprNode] = None
    sup: Optional[ExprNode] = None

    def children(self):
        return tuple(c for c in (self.base, self.sub, self.sup) if c is not None)


@dataclass(frozen=True)
class Sequence(ExprNode):
    """Separator-joined list; ``separators`` may carry one trailing mark."""

    items: tuple[ExprNode, ...]
    separators: tuple[str, ...] = ()

    def children(self):
        return self.items


def walk(node: ExprNode) -> Iterator[ExprNode]:
    """Pre-order traversal in source order."""
    yield node
    for c in node.children():
        yield from walk(c)


def map_children(node: ExprNode, fn: Callable[[ExprNode], ExprNode]) -> ExprNode:
    """Rebuild ``node`` with ``fn`` applied to each direct child."""
    if isinstance(node, Relation):
        return replace(node, operands=tuple(fn(c) for c in node.operands))
    if isinstance(node, OpApply):
        return replace(node, operands=tuple(fn(c) for c in node.operands))
    if isinstance(node, FuncApply):
        head = fn(node.head) if isinstance(node.head, ExprNode) else node.head
        return replace(node, head=head, args=tuple(fn(a) for a in node.args))
    if isinstance(node, Scripted):
        return replace(
            node,
            base=fn(node.base),
            sub=None if node.sub is None else fn(node.sub),
            sup=None if node.sup is None else fn(node.sup),
        )
    if isinstance(node, Sequence):
        return replace(node, items=tuple(fn(c) for c in node.items))
    return node


def transform(node: ExprNode, fn: Callable[[ExprNode], ExprNode]) -> ExprNode:
    """Bottom-up rewrite."""
    return fn(map_children(node, lambda c: transform(c, fn)))


def strip_spans(node: ExprNode) -> ExprNode:
    return transform(node, lambda n: replace(n, span=None))


def leaves(node: ExprNode) -> list[ExprNode]:
    return [n for n in walk(node) if isinstance(n, (Identifier, Number))]


def contains_relation(node: ExprNode) -> bool:
    return any(isinstance(n, Relation) for n in walk(node))
