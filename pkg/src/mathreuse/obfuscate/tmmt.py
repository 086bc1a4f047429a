"""Text and math interchange: sentences replaced by formulas and back."""

from __future__ import annotations

import random
import re
from typing import Optional

from ..docmodel import Document, ObfuscationOperator
from ..mathparse import LatexSyntaxError, Sequence, normalize, parse_latex, render
from .edits import Edit, ObfuscationTrace, apply_edits
from .library import Lexicon, MathTextEntry, load_lexicon
from .treeops import instantiate, match

__all__ = ["apply_tmmt", "sentence_pattern", "sentence_for"]

_SLOT = re.compile(r"\{(\w+)\}")
DIRECTIONS = ("math_to_text", "text_to_math", "auto")


def _literal(text: str) -> str:
    return re.escape(text).replace(r"\ ", r"\s+")


def sentence_pattern(entry: MathTextEntry) -> re.Pattern:
    """Regex for the entry's sentence; each slot captures an inline formula.
    The first letter may appear in either case."""
    parts, pos = [], 0
    for m in _SLOT.finditer(entry.text):
        parts.append(_literal(entry.text[pos:m.start()]))
        parts.append(rf"\$(?P<{m.group(1)}>[^$]+)\$")
        pos = m.end()
    parts.append(_literal(entry.text[pos:]))
    first = entry.text[:1]
    if first.isalpha():
        parts[0] = f"[{first.upper()}{first.lower()}]" + parts[0][1:]
    return re.compile("".join(parts) + r"(?P<_end>[.,;])?")


def sentence_for(entry: MathTextEntry, binding: dict) -> str:
    return _SLOT.sub(lambda m: "$" + render(binding[m.group(1)]) + "$", entry.text)


def _text_to_math_sites(doc: Document, lexicon: Lexicon) -> list[Edit]:
    sites = []
    text_runs = [r for r in doc.text_runs()]
    for entry in lexicon.math_text:
        for m in sentence_pattern(entry).finditer(doc.raw):
            if not any(r.start <= m.start() < r.end for r in text_runs):
                continue
            try:
                binding = {v: normalize(parse_latex(m.group(v))) for v in entry.metavars}
            except LatexSyntaxError:
                continue
            formula = render(instantiate(entry.math, binding)) + (m.group("_end") or "")
            sites.append(Edit(m.start(), m.end(), f"${formula}$", f"text-to-math:{entry.name}"))
    return sites


def _math_to_text_sites(doc: Document, lexicon: Lexicon) -> list[Edit]:
    sites = []
    for run in doc.math_runs():
        if run.tree is None:
            continue
        stmt, mark = run.tree, ""
        if isinstance(stmt, Sequence) and len(stmt.items) == 1 and len(stmt.separators) == 1:
            stmt, mark = stmt.items[0], stmt.separators[0]
        stmt = normalize(stmt)
        for entry in lexicon.math_text:
            binding = match(entry.math, stmt, frozenset(entry.metavars))
            if binding is not None:
                sentence = sentence_for(entry, binding)
                before = doc.raw[:run.start].rstrip()
                if before and before[-1] not in ".!?":
                    sentence = sentence[:1].lower() + sentence[1:]
                sites.append(Edit(run.start, run.end, sentence + mark,
                                  f"math-to-text:{entry.name}"))
                break
    return sites


def apply_tmmt(passage: Document, lexicon: Optional[Lexicon] = None, direction: str = "auto",
               seed: int = 0, count: Optional[int] = None) -> tuple[Document, ObfuscationTrace]:
    """Swap lexicon sentences and their formulas.

    ``direction`` is ``text_to_math``, ``math_to_text`` or ``auto`` (text to
    math when some sentence matches, math to text otherwise).  ``count``
    caps the number of swaps; sites are chosen by ``seed``.
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    lexicon = lexicon or load_lexicon()
    sites: list[Edit] = []
    if direction in ("text_to_math", "auto"):
        sites = _text_to_math_sites(passage, lexicon)
    if direction == "math_to_text" or (direction == "auto" and not sites):
        sites = _math_to_text_sites(passage, lexicon)
    rng = random.Random(seed)
    chosen: list[Edit] = []
    for e in rng.sample(sites, len(sites)):
        if count is not None and len(chosen) >= count:
            break
        if not any(e.start < c.end and c.start < e.end for c in chosen):
            chosen.append(e)
    return apply_edits(passage, chosen, ObfuscationOperator.TMMT, seed)
