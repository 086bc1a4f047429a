"""Rewrite rules and the lexicon, loaded from versioned JSON files."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from ..docmodel import ObfuscationOperator
from ..mathparse import ExprNode, normalize, parse_latex, walk
from ..mathparse import Identifier
from .treeops import Path as TreePath
from .treeops import fold_constants, instantiate, match, subtrees

__all__ = ["RewriteRule", "MathTextEntry", "Lexicon", "load_rules", "load_lexicon", "rule_sites"]


def _template(latex: str) -> ExprNode:
    return normalize(parse_latex(latex))


@dataclass(frozen=True)
class RewriteRule:
    name: str
    pattern: ExprNode
    replacement: ExprNode
    operator_tag: ObfuscationOperator
    semantics_preserving: bool
    metavars: frozenset[str] = frozenset()
    params: tuple[str, ...] = ()
    numeric: bool = False
    post: Optional[str] = None
    residual_scale: Optional[str] = None

    def __post_init__(self):
        missing = {n.name for n in walk(self.replacement) if isinstance(n, Identifier)} & self.metavars
        pattern_vars = {n.name for n in walk(self.pattern) if isinstance(n, Identifier)} & self.metavars
        if not missing <= pattern_vars:
            raise ValueError(f"rule {self.name}: replacement uses unbound metavariables")
        if self.operator_tag is ObfuscationOperator.FM and not self.semantics_preserving:
            raise ValueError(f"rule {self.name}: FM rules must preserve semantics")

    @classmethod
    def from_record(cls, rec: dict) -> "RewriteRule":
        return cls(
            name=rec["name"],
            pattern=_template(rec["pattern"]),
            replacement=_template(rec["replacement"]),
            operator_tag=ObfuscationOperator(rec["operator"]),
            semantics_preserving=bool(rec["semantics_preserving"]),
            metavars=frozenset(rec.get("vars", ())),
            params=tuple(rec.get("params", ())),
            numeric=bool(rec.get("numeric", False)),
            post=rec.get("post"),
            residual_scale=rec.get("residual_scale"),
        )

    def match(self, node: ExprNode) -> Optional[dict[str, ExprNode]]:
        return match(self.pattern, node, self.metavars)

    def apply(self, binding: dict[str, ExprNode], params: Optional[dict[str, ExprNode]] = None) -> ExprNode:
        out = instantiate(self.replacement, {**binding, **(params or {})})
        if self.post == "fold-constants":
            out = fold_constants(out)
        return normalize(out)


def rule_sites(tree: ExprNode, rules: list[RewriteRule]) -> list[tuple[RewriteRule, TreePath, dict]]:
    """Every ``(rule, path, binding)`` where a rule pattern matches a subtree, in
    pre-order and then rule order."""
    sites = []
    for path, node in subtrees(tree):
        for rule in rules:
            binding = rule.match(node)
            if binding is not None:
                sites.append((rule, path, binding))
    return sites


def _read(path: Optional[Union[str, Path]], default: str) -> dict:
    if path is None:
        return json.loads(resources.files("mathreuse.data").joinpath(default).read_text("utf-8"))
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


@lru_cache(maxsize=None)
def load_rules(path: Optional[str] = None) -> tuple[RewriteRule, ...]:
    data = _read(path, "rules.json")
    return tuple(RewriteRule.from_record(r) for r in data["rules"])


@dataclass(frozen=True)
class MathTextEntry:
    """A formula template paired with a sentence template; ``{v}`` slots in the
    sentence hold inline formulas bound to the metavariable ``v``."""

    name: str
    math: ExprNode
    metavars: tuple[str, ...]
    text: str


@dataclass(frozen=True)
class Lexicon:
    text_synonyms: dict[str, tuple[str, ...]] = field(default_factory=dict)
    math_text: tuple[MathTextEntry, ...] = ()
    entity_map: dict[str, str] = field(default_factory=dict)
    fillers: tuple[str, ...] = ()

    @classmethod
    def from_dict(cls, data: dict) -> "Lexicon":
        entries = tuple(
            MathTextEntry(e["name"], _template(e["math"]), tuple(e["vars"]), e["text"])
            for e in data.get("math_text", ())
        )
        for e in entries:
            for v in e.metavars:
                if e.text.count("{" + v + "}") != 1:
                    raise ValueError(f"lexicon entry {e.name}: slot {{{v}}} must occur exactly once")
        return cls(
            text_synonyms={k: tuple(v) for k, v in data.get("text_synonyms", {}).items()},
            math_text=entries,
            entity_map=dict(data.get("entity_map", {})),
            fillers=tuple(data.get("fillers", ())),
        )


@lru_cache(maxsize=None)
def load_lexicon(path: Optional[str] = None) -> Lexicon:
    return Lexicon.from_dict(_read(path, "lexicon.json"))
