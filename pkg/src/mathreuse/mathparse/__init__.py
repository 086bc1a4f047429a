"""LaTeX math tokenizing, parsing and the structural primitives built on it."""

from .canon import CanonTable, load_canon_table, normalize, synonym_swaps
from .lexer import MIRROR, RELATOR_CANON, RELATORS, LatexSyntaxError, MathToken, tokenize_latex
from .nodes import (
    ExprNode, FuncApply, Identifier, Number, OpApply, Relation, Scripted, Sequence,
    leaves, strip_spans, transform, walk,
)
from .parser import ParseError, parse_formula, parse_latex
from .render import render
from .structure import (
    RelatorKind, alpha_equivalent, identifier_leaves, identifiers, maximal_expressions,
    relator_kind,
)

__all__ = [
    "CanonTable", "ExprNode", "FuncApply", "Identifier", "LatexSyntaxError", "MIRROR",
    "MathToken", "Number", "OpApply", "ParseError", "RELATORS", "RELATOR_CANON", "Relation",
    "RelatorKind", "Scripted", "Sequence", "alpha_equivalent", "identifier_leaves",
    "identifiers", "leaves", "load_canon_table", "maximal_expressions", "normalize",
    "parse_formula", "parse_latex", "relator_kind", "render", "strip_spans",
    "synonym_swaps", "tokenize_latex", "transform", "walk",
]
