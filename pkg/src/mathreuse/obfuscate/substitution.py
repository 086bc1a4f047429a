"""Substitutions: maximal expressions replaced by fresh heads defined in clauses."""

from __future__ import annotations

import random
import string
from dataclasses import dataclass, field
from typing import Iterable, Optional

from ..docmodel import Document, ObfuscationOperator
from ..mathparse import (
    ExprNode, FuncApply, Identifier, Sequence, identifiers, leaves, render,
)
from ..mathparse.nodes import map_children
from .edits import Edit, ObfuscationTrace, TraceEdit, apply_edits
from .paraphrase import InapplicableError
from .treeops import get_at, instantiate, maximal_paths, replace_at

__all__ = [
    "Clause", "FreshNamePolicy", "SubstitutionError", "apply_substitution",
    "resolve_substitutions", "substitute_document",
]


class SubstitutionError(ValueError):
    pass


@dataclass(frozen=True)
class Clause:
    """``head = body`` where ``head`` is ``A`` or ``A(x, y, ...)``."""

    head: ExprNode
    body: ExprNode

    @property
    def name(self) -> str:
        head = self.head.head if isinstance(self.head, FuncApply) else self.head
        if not isinstance(head, Identifier):
            raise SubstitutionError("clause head must be an identifier or an application of one")
        return head.name

    @property
    def params(self) -> tuple[str, ...]:
        if not isinstance(self.head, FuncApply):
            return ()
        names = []
        for p in self.head.args:
            if not isinstance(p, Identifier):
                raise SubstitutionError(f"clause {self.name}: parameters must be identifiers")
            names.append(p.name)
        return tuple(names)

    def latex(self) -> str:
        return f"{render(self.head)}={render(self.body)}"


@dataclass(frozen=True)
class FreshNamePolicy:
    alphabet: tuple[str, ...] = tuple(string.ascii_uppercase)
    used: frozenset[str] = field(default_factory=frozenset)

    def take(self, taken: set[str]) -> str:
        for name in self.alphabet:
            if name not in taken and name not in self.used:
                taken.add(name)
                return name
        raise SubstitutionError("fresh-name alphabet exhausted")


def _distinct(names: Iterable[str]) -> list[str]:
    seen: dict[str, None] = {}
    for n in names:
        seen.setdefault(n, None)
    return list(seen)


def apply_substitution(formula: ExprNode, policy: Optional[FreshNamePolicy] = None, seed: int = 0,
                       count: Optional[int] = None) -> tuple[ExprNode, list[Clause], ObfuscationTrace]:
    """Replace maximal expressions having at least two leaves by fresh heads.

    ``count`` limits how many are replaced (seed-chosen); by default all
    eligible ones are.  A head takes the distinct identifiers of its
    expression as arguments, or none if the expression has no identifiers.
    """
    policy = policy or FreshNamePolicy()
    rng = random.Random(seed)
    paths = [p for p in maximal_paths(formula) if len(leaves(get_at(formula, p))) >= 2]
    if count is not None and count < len(paths):
        paths = sorted(rng.sample(paths, count))
    taken = set(identifiers(formula))
    clauses: list[Clause] = []
    edits: list[TraceEdit] = []
    out = formula
    for path in paths:
        expr = get_at(formula, path)
        name = policy.take(taken)
        args = tuple(Identifier(n) for n in _distinct(identifiers(expr)))
        head = FuncApply(Identifier(name), args) if args else Identifier(name)
        clauses.append(Clause(head, expr))
        out = replace_at(out, path, head)
        span = expr.span or (0, 0)
        edits.append(TraceEdit(span, span, f"substitute:{name}", render(head)))
    return out, clauses, ObfuscationTrace(ObfuscationOperator.S, tuple(edits), seed)


def resolve_substitutions(formula: ExprNode, clauses: Iterable[Clause],
                          heads: Optional[Iterable[str]] = None) -> ExprNode:
    """Expand every clause head in ``formula``.

    ``heads`` lists names that must be defined; a head among them without a
    clause is an error, as is a clause set that refers to itself.
    """
    table: dict[str, Clause] = {}
    for c in clauses:
        if c.name in table:
            raise SubstitutionError(f"head {c.name} has more than one clause")
        table[c.name] = c
    expected = set(heads or ()) | set(table)
    missing = sorted(n for n in set(identifiers(formula)) & expected if n not in table)
    if missing:
        raise SubstitutionError(f"no clause for head {missing[0]}")
    done: dict[str, ExprNode] = {}

    def body(name: str, stack: tuple[str, ...]) -> ExprNode:
        if name in stack:
            raise SubstitutionError("cyclic clauses: " + " -> ".join(stack + (name,)))
        if name not in done:
            done[name] = expand(table[name].body, stack + (name,))
        return done[name]

    def expand(node: ExprNode, stack: tuple[str, ...]) -> ExprNode:
        def fn(n: ExprNode) -> ExprNode:
            if isinstance(n, FuncApply) and isinstance(n.head, Identifier) and n.head.name in table:
                clause = table[n.head.name]
                if len(clause.params) != len(n.args):
                    raise SubstitutionError(f"head {clause.name} applied to {len(n.args)} arguments, "
                                            f"defined with {len(clause.params)}")
                resolved = body(clause.name, stack)
                return instantiate(resolved, dict(zip(clause.params, n.args)))
            if isinstance(n, Identifier) and n.name in table:
                missing_here = [m for m in identifiers(table[n.name].body) if m in expected and m not in table]
                if missing_here:
                    raise SubstitutionError(f"no clause for head {missing_here[0]}")
                if table[n.name].params:
                    raise SubstitutionError(f"head {n.name} used without its arguments")
                return body(n.name, stack)
            return map_children(n, lambda c: expand(c, stack))
        return fn(node)

    return expand(formula, ())


def _join_clauses(parts: list[str]) -> str:
    if len(parts) == 1:
        return parts[0]
    return ", ".join(parts[:-1]) + " and " + parts[-1]


def substitute_document(doc: Document, seed: int = 0, count: Optional[int] = None,
                        runs: int = 1) -> tuple[Document, ObfuscationTrace]:
    """Substitute inside up to ``runs`` seed-chosen formulas of ``doc`` and
    append a ``where`` clause sentence after each."""
    rng = random.Random(seed)
    used = frozenset(n for r in doc.math_runs() if r.tree is not None for n in identifiers(r.tree))
    policy = FreshNamePolicy(used=used)
    eligible = []
    for run in doc.math_runs():
        if run.tree is None:
            continue
        stmt, mark = run.tree, None
        if isinstance(stmt, Sequence) and len(stmt.items) == 1 and len(stmt.separators) == 1:
            stmt, mark = stmt.items[0], stmt.separators[0]
        if any(len(leaves(get_at(stmt, p))) >= 2 for p in maximal_paths(stmt)):
            eligible.append((run, stmt, mark))
    if not eligible:
        return apply_edits(doc, [], ObfuscationOperator.S, seed, ["no formula with a compound maximal expression"])
    picked = sorted(rng.sample(range(len(eligible)), min(runs, len(eligible))))
    edits: list[Edit] = []
    for idx in picked:
        run, stmt, mark = eligible[idx]
        new, clauses, _ = apply_substitution(stmt, policy, rng.randrange(2**32), count)
        policy = FreshNamePolicy(used=policy.used | {c.name for c in clauses})
        edits.append(Edit(run.content_start, run.content_end, render(new) + ",", "substitute"))
        sentence = " where " + _join_clauses([f"${c.latex()}$" for c in clauses])
        rest = doc.raw[run.end:].split("\n\n", 1)[0]
        if mark:
            sentence += mark
        elif not rest.strip():
            sentence += "."
        elif rest[0] not in ".,;":
            sentence += ","
        edits.append(Edit(run.end, run.end, sentence, "where-clause"))
    if not edits:
        raise InapplicableError("no substitution site")
    return apply_edits(doc, edits, ObfuscationOperator.S, seed)
