"""Formula manipulation through the algebraic rewrite library."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence as Seq

from ..docmodel import Document, ObfuscationOperator
from ..mathparse import ExprNode, Number, OpApply, Sequence, identifiers, normalize, render, walk
from .edits import Edit, ObfuscationTrace, apply_edits
from .library import RewriteRule, load_rules, rule_sites
from .treeops import NotEvaluable, Path, replace_at, residuals

__all__ = [
    "DerivationStep", "fm_rules", "apply_formula_manipulation", "numerically_equivalent",
    "manipulate_document",
]


@dataclass(frozen=True)
class DerivationStep:
    rule: str
    path: Path
    tree: ExprNode
    scale: float = 1.0   # residuals of ``tree`` are ``scale`` times the previous ones
    numeric: bool = True


def fm_rules() -> list[RewriteRule]:
    return [r for r in load_rules() if r.operator_tag is ObfuscationOperator.FM]


def _awkward(tree: ExprNode) -> bool:
    # a literal written after its factor (``x 2``) is legal but never used
    return any(isinstance(n, OpApply) and n.op == "" and isinstance(n.operands[-1], Number)
               for n in walk(tree))


def apply_formula_manipulation(expr: ExprNode, rules: Optional[Seq[RewriteRule]] = None, steps: int = 1,
                               seed: int = 0) -> tuple[ExprNode, list[DerivationStep]]:
    """Apply up to ``steps`` rule instances at seed-chosen sites of ``normalize(expr)``.

    Returns the final tree and one derivation step per application.  Rules
    with parameters (``k`` in both-sides rules) get a seeded integer from 2
    to 9.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    rules = fm_rules() if rules is None else list(rules)
    for r in rules:
        if not r.semantics_preserving:
            raise ValueError(f"rule {r.name} does not preserve semantics")
    rng = random.Random(seed)
    current = normalize(expr)
    derivation: list[DerivationStep] = []
    for _ in range(steps):
        options = []
        for rule, path, binding in rule_sites(current, rules):
            params = {p: Number(str(rng.randint(2, 9))) for p in rule.params}
            new = normalize(replace_at(current, path, rule.apply(binding, params)))
            if new != current and not _awkward(new):
                scale = float(params[rule.residual_scale].value) if rule.residual_scale else 1.0
                options.append(DerivationStep(rule.name, path, new, scale, rule.numeric))
        if not options:
            break
        step = rng.choice(options)
        derivation.append(step)
        current = step.tree
    return current, derivation


def numerically_equivalent(before: ExprNode, after: ExprNode, scale: float = 1.0, samples: int = 8,
                           seed: int = 0, tol: float = 1e-9) -> Optional[bool]:
    """Compare values (or relation residuals, the later ones divided by
    ``scale``) at random assignments in [-2, 2].  ``None`` when the trees
    leave the evaluable fragment at every sampled point.

    ``tol`` is absolute up to magnitude 1 and relative beyond it, since
    binary floats cannot resolve 1e-9 on large values.
    """
    rng = random.Random(seed)
    names = sorted(set(identifiers(before)) | set(identifiers(after)))
    checked = False
    for _ in range(samples):
        env = {n: rng.uniform(-2.0, 2.0) for n in names}
        try:
            r0, r1 = residuals(before, env), residuals(after, env)
        except NotEvaluable:
            continue
        if len(r0) != len(r1):
            return False
        checked = True
        if any(abs(a * scale - b) > tol * max(1.0, abs(a * scale), abs(b)) for a, b in zip(r0, r1)):
            return False
    return True if checked else None


def manipulate_document(doc: Document, seed: int = 0, steps: int = 1,
                        rules: Optional[Seq[RewriteRule]] = None,
                        runs: int = 1) -> tuple[Document, ObfuscationTrace]:
    """Manipulate up to ``runs`` seed-chosen formulas of ``doc``."""
    rules = fm_rules() if rules is None else list(rules)
    rng = random.Random(seed)
    candidates = []
    for run in doc.math_runs():
        if run.tree is None:
            continue
        stmt, mark = run.tree, ""
        if isinstance(stmt, Sequence) and len(stmt.items) == 1 and len(stmt.separators) == 1:
            stmt, mark = stmt.items[0], stmt.separators[0]
        if rule_sites(normalize(stmt), rules):
            candidates.append((run, stmt, mark))
    edits = []
    for idx in sorted(rng.sample(range(len(candidates)), min(runs, len(candidates)))):
        run, stmt, mark = candidates[idx]
        new, derivation = apply_formula_manipulation(stmt, rules, steps, rng.randrange(2**32))
        if derivation:
            edits.append(Edit(run.content_start, run.content_end, render(new) + mark,
                              "+".join(s.rule for s in derivation)))
    return apply_edits(doc, edits, ObfuscationOperator.FM, seed)
