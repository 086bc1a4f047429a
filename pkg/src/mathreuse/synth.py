"""Synthetic document collections with planted reuse pairs."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .docmodel import Document, ReuseCase, Span, segment_document
from .obfuscate import derive_seed, generate_pair, parse_recipe

__all__ = ["PlantedCase", "Benchmark", "BENCH_RECIPES", "synthetic_document", "build_benchmark"]

LETTERS = "abcdklmnpqrstuvwxyz"
CONNECTIVES = ("Then", "Hence", "so", "and thus", "Therefore", "which gives", "Now", "Since")

BENCH_RECIPES: dict[str, list] = {
    "copy": [],
    "P": [{"op": "P"}],
    "ID": [{"op": "ID"}],
    "S": [{"op": "S"}],
    "TMMT": [{"op": "TMMT", "params": {"direction": "math_to_text"}}],
    "DP": [{"op": "DP", "params": {"full": True, "swaps": 0}}],
    "FM": [{"op": "FM"}],
    "VS": [{"op": "VS", "params": {"entity_map": {"x": "\\xi", "y": "\\eta"}}}],
}


@dataclass(frozen=True)
class PlantedCase:
    """A truth span pair without operator labels (verbatim copies)."""

    src: Span
    insp: Span


def _atom(rng: random.Random) -> str:
    r = rng.random()
    if r < 0.15:
        return str(rng.randint(2, 9))
    name = rng.choice(LETTERS)
    if r < 0.25:
        return f"{name}^{rng.randint(2, 3)}"
    if r < 0.32:
        return f"{name}_{rng.randint(1, 4)}"
    return name


def _term(rng: random.Random) -> str:
    parts = [_atom(rng) for _ in range(rng.randint(1, 2))]
    if len(parts) == 2 and parts[1][0].isdigit():
        parts = [parts[1], parts[0]] if not parts[0][0].isdigit() else parts[:1]
    return "".join(parts)


def _side(rng: random.Random) -> str:
    out = _term(rng)
    for _ in range(rng.randint(0, 2)):
        out += rng.choice("+-") + _term(rng)
    return out


def _formula(rng: random.Random) -> str:
    rel = rng.choice(["=", "=", "<", "\\leq "])
    return f"{_side(rng)}{rel}{_side(rng)}"


def synthetic_document(doc_id: str, rng: random.Random, n_formulas: int = 6) -> Document:
    """One paragraph of formulas joined by short connectives.

    Each document also holds a product formula ``u=vw`` and mentions ``x``
    and ``y`` so every benchmark recipe finds a site.
    """
    formulas = [_formula(rng) for _ in range(n_formulas)]
    a, b, c = rng.sample(LETTERS, 3)
    formulas.insert(rng.randrange(len(formulas) + 1), f"{a}={b}{c}")
    formulas.insert(rng.randrange(len(formulas) + 1), f"x+{rng.randint(2, 9)}=y-{rng.randint(2, 9)}")
    pieces = [f"${formulas[0]}$"]
    for f in formulas[1:]:
        pieces.append(f" {rng.choice(CONNECTIVES)} ${f}$")
    return segment_document(doc_id, "".join(pieces) + ".")


@dataclass
class Benchmark:
    collection: list[Document]
    queries: list[Document]
    truth: list = field(default_factory=list)       # ReuseCase or PlantedCase
    recipe_of: dict[str, str] = field(default_factory=dict)
    source_of: dict[str, str] = field(default_factory=dict)


def build_benchmark(n_docs: int = 1000, pairs_per_recipe: int = 50, seed: int = 0,
                    recipes: Optional[dict[str, list]] = None) -> Benchmark:
    """``n_docs`` collection documents, of which ``pairs_per_recipe`` per
    recipe are sources of a planted inspected query document."""
    recipes = BENCH_RECIPES if recipes is None else recipes
    n_sources = pairs_per_recipe * len(recipes)
    if n_sources > n_docs:
        raise ValueError("more planted sources than collection documents")
    rng = random.Random(seed)
    collection = [synthetic_document(f"d{k:05d}", rng) for k in range(n_docs)]
    order = rng.sample(range(n_docs), n_sources)
    bench = Benchmark(collection, [])
    k = 0
    for name in sorted(recipes):
        steps = parse_recipe(recipes[name]) if recipes[name] else []
        for j in range(pairs_per_recipe):
            src = collection[order[k]]
            k += 1
            qid = f"q-{name}-{j:03d}"
            if steps:
                insp, cases = generate_pair(src, steps, derive_seed(seed, name, j), insp_id=qid)
            else:
                insp = segment_document(qid, src.raw)
                cases = [PlantedCase(Span(src.id, 0, src.length), Span(qid, 0, insp.length))]
            bench.queries.append(insp)
            bench.truth.extend(cases)
            bench.recipe_of[qid] = name
            bench.source_of[qid] = src.id
    return bench
