"""Composing operators into planted (source, inspected) pairs with ground truth."""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional, Union

from ..docmodel import Document, ObfuscationOperator, ReuseCase, Span, TextRun, segment_document
from .edits import ObfuscationTrace, map_position
from .insdel import apply_insert_delete
from .library import load_lexicon, load_rules
from .manipulation import manipulate_document
from .paraphrase import apply_paraphrase
from .presentation import present_document
from .subject import apply_variation_of_subject
from .substitution import substitute_document
from .tmmt import apply_tmmt

__all__ = [
    "RecipeError", "RecipeStep", "GenerationResult", "derive_seed", "parse_recipe", "load_recipes",
    "passages", "generate_pair", "generate_pair_traced",
]

log = logging.getLogger(__name__)


class RecipeError(ValueError):
    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message if index is None else f"recipe step {index}: {message}")
        self.index = index


@dataclass(frozen=True)
class RecipeStep:
    op: ObfuscationOperator
    params: dict = field(default_factory=dict, hash=False)
    seed: int = 0


def derive_seed(*parts: Any) -> int:
    digest = hashlib.sha256(":".join(str(p) for p in parts).encode("utf-8")).hexdigest()
    return int(digest[:16], 16)


# -- operator dispatch -------------------------------------------------------

def _p(doc, seed, mirror=True, rate=1.0):
    return apply_paraphrase(doc, load_lexicon(), seed, mirror=mirror, rate=rate)


def _id(doc, seed, mode="insert", site="auto", count=1):
    return apply_insert_delete(doc, mode, seed=seed, site=site, count=count)


def _s(doc, seed, count=None, runs=1):
    return substitute_document(doc, seed, count=count, runs=runs)


def _tmmt(doc, seed, direction="auto", count=None):
    return apply_tmmt(doc, direction=direction, seed=seed, count=count)


def _dp(doc, seed, rename=None, full=False, swaps=1):
    return present_document(doc, rename=rename, full=full, seed=seed, swaps=swaps)


def _fm(doc, seed, steps=1, runs=1, rules=None):
    library = None
    if rules is not None:
        by_name = {r.name: r for r in load_rules()}
        unknown = [r for r in rules if r not in by_name]
        if unknown:
            raise ValueError(f"unknown rule {unknown[0]!r}")
        library = [by_name[r] for r in rules]
    return manipulate_document(doc, seed, steps=steps, rules=library, runs=runs)


def _vs(doc, seed, entity_map=None):
    return apply_variation_of_subject(doc, load_lexicon().entity_map if entity_map is None else entity_map,
                                      seed)


DISPATCH: dict[ObfuscationOperator, Callable] = {
    ObfuscationOperator.P: _p, ObfuscationOperator.ID: _id, ObfuscationOperator.S: _s,
    ObfuscationOperator.TMMT: _tmmt, ObfuscationOperator.DP: _dp, ObfuscationOperator.FM: _fm,
    ObfuscationOperator.VS: _vs,
}
PARAMS = {
    ObfuscationOperator.P: {"mirror", "rate"},
    ObfuscationOperator.ID: {"mode", "site", "count"},
    ObfuscationOperator.S: {"count", "runs"},
    ObfuscationOperator.TMMT: {"direction", "count"},
    ObfuscationOperator.DP: {"rename", "full", "swaps"},
    ObfuscationOperator.FM: {"steps", "runs", "rules"},
    ObfuscationOperator.VS: {"entity_map"},
}


def parse_recipe(data: Any) -> list[RecipeStep]:
    """Validate a JSON recipe: a list of ``{"op", "params", "seed"}`` objects."""
    if not isinstance(data, list) or not data:
        raise RecipeError("a recipe must be a non-empty list of steps")
    steps = []
    for k, raw in enumerate(data):
        if isinstance(raw, str):
            raw = {"op": raw}
        if not isinstance(raw, dict) or "op" not in raw:
            raise RecipeError("each step must be an object with an 'op' field", k)
        extra = set(raw) - {"op", "params", "seed"}
        if extra:
            raise RecipeError(f"unknown step fields {sorted(extra)}", k)
        try:
            op = ObfuscationOperator(raw["op"])
        except ValueError:
            raise RecipeError(f"unknown operator {raw['op']!r}", k) from None
        params = raw.get("params", {})
        if not isinstance(params, dict):
            raise RecipeError("params must be an object", k)
        unknown = set(params) - PARAMS[op]
        if unknown:
            raise RecipeError(f"unknown parameters for {op.value}: {sorted(unknown)}", k)
        seed = raw.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise RecipeError("seed must be an integer", k)
        steps.append(RecipeStep(op, dict(params), seed))
    return steps


def load_recipes(path: Union[str, Path]) -> list[list[RecipeStep]]:
    """A recipe file holds one recipe (list of steps) or a list of recipes."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, list) and data and all(isinstance(r, list) for r in data):
        out = []
        for k, recipe in enumerate(data):
            try:
                out.append(parse_recipe(recipe))
            except RecipeError as exc:
                raise RecipeError(f"recipe {k}: {exc}", k) from None
        return out
    return [parse_recipe(data)]


# -- passages and span bookkeeping --------------------------------------------

_PARAGRAPH = re.compile(r"\S(?:.*?\S)?(?=\s*\n\s*\n|\s*$)", re.S)


def passages(doc: Document) -> list[tuple[int, int]]:
    """Paragraph spans (blank-line separated, surrounding whitespace excluded)."""
    return [(m.start(), m.end()) for m in _PARAGRAPH.finditer(doc.raw)]


@dataclass
class GenerationResult:
    document: Document
    cases: list[ReuseCase]
    traces: list[ObfuscationTrace]


def _case_type(src: Document, s: tuple[int, int], insp: Document, i: tuple[int, int]) -> str:
    def touches(doc, span, math):
        for r in doc.runs:
            if r.start < span[1] and span[0] < r.end:
                if math and not isinstance(r, TextRun):
                    return True
                if not math and isinstance(r, TextRun) and r.text[max(0, span[0] - r.start):span[1] - r.start].strip():
                    return True
        return False

    has_math = touches(src, s, True) and touches(insp, i, True)
    has_text = touches(src, s, False) or touches(insp, i, False)
    if has_math and has_text:
        return "both"
    return "math" if has_math else "text"


def generate_pair_traced(source: Document, recipe: list, seed: int = 0,
                         insp_id: Optional[str] = None) -> GenerationResult:
    steps = recipe if recipe and isinstance(recipe[0], RecipeStep) else parse_recipe(recipe)
    current = segment_document(insp_id or f"{source.id}.insp", source.raw)
    paras = passages(source)
    mapped = list(paras)
    regions: list[tuple[int, int, ObfuscationOperator]] = []
    traces: list[ObfuscationTrace] = []
    for k, step in enumerate(steps):
        try:
            current, trace = DISPATCH[step.op](current, derive_seed(seed, k, step.seed), **step.params)
        except (TypeError, ValueError) as exc:
            raise RecipeError(str(exc), k) from exc
        traces.append(trace)
        if not trace.edits:
            continue
        edits = trace.edits
        mapped = [(map_position(a, edits, False), map_position(b, edits, True)) for a, b in mapped]
        regions = [(map_position(a, edits, False), map_position(b, edits, True), op) for a, b, op in regions]
        regions += [(e.replacement[0], e.replacement[1], step.op) for e in edits]
    cases = []
    for (s0, s1), (i0, i1) in zip(paras, mapped):
        ops = {op for a, b, op in regions if (a < i1 and i0 < b) or (a == b and i0 <= a <= i1)}
        if ops and i0 < i1:
            cases.append(ReuseCase(Span(source.id, s0, s1), Span(current.id, i0, i1), frozenset(ops),
                                   _case_type(source, (s0, s1), current, (i0, i1))))
    if not cases:
        log.warning("recipe left %s unchanged; no reuse case emitted", source.id)
    return GenerationResult(current, cases, traces)


def generate_pair(source: Document, recipe: list, seed: int = 0,
                  insp_id: Optional[str] = None) -> tuple[Document, list[ReuseCase]]:
    """Apply ``recipe`` to ``source`` and return the inspected document with
    one ground-truth case per paragraph touched by some operator."""
    result = generate_pair_traced(source, recipe, seed, insp_id)
    return result.document, result.cases
