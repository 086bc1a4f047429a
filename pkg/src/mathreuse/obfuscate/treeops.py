"""Tree addressing, template matching and numeric evaluation."""

from __future__ import annotations

import math
from dataclasses import replace
from decimal import Decimal
from typing import Iterator, Mapping, Optional

from ..mathparse import ExprNode, FuncApply, Identifier, Number, OpApply, Relation, Scripted, Sequence
from ..mathparse.canon import collapse_decimal
from ..mathparse.nodes import map_children

Path = tuple[int, ...]


def subtrees(node: ExprNode, path: Path = ()) -> Iterator[tuple[Path, ExprNode]]:
    """Pre-order ``(path, node)`` pairs; a path indexes ``children()``."""
    yield path, node
    for k, child in enumerate(node.children()):
        yield from subtrees(child, path + (k,))


def get_at(node: ExprNode, path: Path) -> ExprNode:
    for k in path:
        node = node.children()[k]
    return node


def replace_at(node: ExprNode, path: Path, new: ExprNode) -> ExprNode:
    if not path:
        return new
    head, rest = path[0], path[1:]
    counter = iter(range(len(node.children())))

    def fn(child: ExprNode) -> ExprNode:
        return replace_at(child, rest, new) if next(counter) == head else child

    return map_children(node, fn)


def maximal_paths(node: ExprNode, path: Path = ()) -> list[Path]:
    """Paths of the maximal expressions, in the order ``maximal_expressions`` returns them."""
    from ..mathparse.nodes import contains_relation

    if not contains_relation(node):
        return [path]
    out: list[Path] = []
    for k, child in enumerate(node.children()):
        out.extend(maximal_paths(child, path + (k,)))
    return out


# -- templates ---------------------------------------------------------------

def match(pattern: ExprNode, node: ExprNode, metavars: frozenset[str],
          binding: Optional[dict[str, ExprNode]] = None) -> Optional[dict[str, ExprNode]]:
    """Bind the metavariables of ``pattern`` so that it equals ``node``.

    Non-metavariable identifiers must match literally; a repeated
    metavariable must bind equal subtrees.
    """
    binding = {} if binding is None else binding
    if isinstance(pattern, Identifier) and pattern.name in metavars:
        bound = binding.get(pattern.name)
        if bound is None:
            binding[pattern.name] = node
            return binding
        return binding if bound == node else None
    if type(pattern) is not type(node):
        return None
    if isinstance(pattern, Identifier):
        return binding if pattern.name == node.name else None
    if isinstance(pattern, Number):
        return binding if pattern.value == node.value else None
    if isinstance(pattern, Relation) and pattern.relators != node.relators:
        return None
    if isinstance(pattern, OpApply) and (pattern.op, pattern.close) != (node.op, node.close):
        return None
    if isinstance(pattern, FuncApply):
        if isinstance(pattern.head, str) or isinstance(node.head, str):
            if pattern.head != node.head:
                return None
    if isinstance(pattern, Scripted):
        if (pattern.sub is None) != (node.sub is None) or (pattern.sup is None) != (node.sup is None):
            return None
    if isinstance(pattern, Sequence) and pattern.separators != node.separators:
        return None
    pc, nc = pattern.children(), node.children()
    if len(pc) != len(nc):
        return None
    for p, n in zip(pc, nc):
        if match(p, n, metavars, binding) is None:
            return None
    return binding


def instantiate(template: ExprNode, binding: Mapping[str, ExprNode]) -> ExprNode:
    """Replace metavariable identifiers by their bound subtrees (simultaneously)."""
    if isinstance(template, Identifier) and template.name in binding:
        return binding[template.name]
    return replace(map_children(template, lambda c: instantiate(c, binding)), span=None)


# -- numeric evaluation ------------------------------------------------------

class NotEvaluable(ValueError):
    pass


_MUL = {"", "\\cdot", "\\times", "*"}


def evaluate(node: ExprNode, env: Mapping[str, float]) -> float:
    """Real value of an arithmetic tree; raises NotEvaluable outside that fragment."""
    if isinstance(node, Number):
        return float(node.value)
    if isinstance(node, Identifier):
        if node.name not in env:
            raise NotEvaluable(f"unbound identifier {node.name}")
        return env[node.name]
    if isinstance(node, OpApply):
        if node.is_fence:
            if node.op in ("(", "{", "[") and len(node.operands) == 1:
                return evaluate(node.operands[0], env)
            if node.op == "|" and len(node.operands) == 1:
                return abs(evaluate(node.operands[0], env))
            raise NotEvaluable(node.op)
        vals = [evaluate(c, env) for c in node.operands]
        if len(vals) == 1:
            if node.op == "-":
                return -vals[0]
            if node.op == "+":
                return vals[0]
            raise NotEvaluable(node.op)
        a, b = vals
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op in _MUL:
            return a * b
        if node.op in ("/", "\\div"):
            if b == 0:
                raise NotEvaluable("division by zero")
            return a / b
        raise NotEvaluable(node.op)
    if isinstance(node, Scripted) and node.sub is None and node.sup is not None:
        base, exp = evaluate(node.base, env), evaluate(node.sup, env)
        if base < 0 and not float(exp).is_integer() or base == 0 and exp < 0:
            raise NotEvaluable("power outside the reals")
        try:
            return base ** exp
        except OverflowError as exc:
            raise NotEvaluable("overflow") from exc
    if isinstance(node, FuncApply) and node.head == "\\sqrt" and len(node.args) == 1:
        v = evaluate(node.args[0], env)
        if v < 0:
            raise NotEvaluable("sqrt of a negative number")
        return math.sqrt(v)
    raise NotEvaluable(type(node).__name__)


def residuals(node: ExprNode, env: Mapping[str, float]) -> list[float]:
    """``lhs - rhs`` for every link of a relation, or ``[value]`` for an expression."""
    if isinstance(node, Relation):
        vals = [evaluate(c, env) for c in node.operands]
        return [vals[k] - vals[k + 1] for k in range(len(vals) - 1)]
    return [evaluate(node, env)]


# -- constant folding ----------------------------------------------------------

def _terms(node: ExprNode, sign: int, out: list[tuple[int, ExprNode]]) -> None:
    if isinstance(node, OpApply) and not node.is_fence and len(node.operands) == 2 and node.op in ("+", "-"):
        _terms(node.operands[0], sign, out)
        _terms(node.operands[1], sign if node.op == "+" else -sign, out)
    else:
        out.append((sign, node))


def fold_constants(node: ExprNode) -> ExprNode:
    """Combine the numeric literals of each additive chain into one trailing literal."""
    node = map_children(node, fold_constants)
    if not (isinstance(node, OpApply) and not node.is_fence and len(node.operands) == 2
            and node.op in ("+", "-")):
        return node
    terms: list[tuple[int, ExprNode]] = []
    _terms(node, 1, terms)
    numeric = [(s, t) for s, t in terms if isinstance(t, Number)]
    if len(numeric) < 2:
        return node
    total = sum((s * Decimal(t.value) for s, t in numeric), Decimal(0))
    rest = [(s, t) for s, t in terms if not isinstance(t, Number)]
    if total != 0 or not rest:
        rest.append((1 if total >= 0 else -1, Number(collapse_decimal(format(abs(total), "f")))))
    first_sign, acc = rest[0]
    if first_sign < 0:
        acc = OpApply("-", (acc,))
    for sign, term in rest[1:]:
        acc = OpApply("+" if sign > 0 else "-", (acc, term))
    return acc
