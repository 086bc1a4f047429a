"""Tokenizer for LaTeX math-mode fragments.

Whitespace and purely typographic spacing (``\\,``, ``\\quad``, ``\\\\``,
``&``, ``\\displaystyle``, environment markers) are skipped; every other
character or control sequence becomes a :class:`MathToken`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

__all__ = [
    "MathToken",
    "LatexSyntaxError",
    "tokenize_latex",
    "GREEK",
    "RELATORS",
    "RELATOR_CANON",
    "MIRROR",
    "OPEN_GROUPS",
    "CLOSE_GROUPS",
]

IDENTIFIER = "identifier"
NUMBER = "number"
OPERATOR = "operator"
RELATION = "relation"
COMMAND = "command"
OPEN_GROUP = "open-group"
CLOSE_GROUP = "close-group"
SUBSCRIPT = "subscript-marker"
SUPERSCRIPT = "superscript-marker"

TOKEN_KINDS = (
    IDENTIFIER, NUMBER, OPERATOR, RELATION, COMMAND,
    OPEN_GROUP, CLOSE_GROUP, SUBSCRIPT, SUPERSCRIPT,
)

GREEK = frozenset("""
alpha beta gamma delta epsilon varepsilon zeta eta theta vartheta iota kappa
lambda mu nu xi pi varpi rho varrho sigma varsigma tau upsilon phi varphi chi
psi omega Gamma Delta Theta Lambda Xi Pi Sigma Upsilon Phi Psi Omega ell
""".split())

# lexeme -> canonical relator symbol
RELATOR_CANON = {
    "=": "=", "\\neq": "≠", "\\ne": "≠", "≠": "≠",
    "<": "<", "\\lt": "<", ">": ">", "\\gt": ">",
    "\\leq": "≤", "\\le": "≤", "\\leqslant": "≤", "≤": "≤",
    "\\geq": "≥", "\\ge": "≥", "\\geqslant": "≥", "≥": "≥",
    "\\in": "∈", "∈": "∈",
    "\\subset": "⊂", "⊂": "⊂",
    "\\subseteq": "⊆", "⊆": "⊆",
    "\\equiv": "≡", "≡": "≡",
    "\\sim": "∼", "∼": "∼",
}
RELATORS = frozenset(RELATOR_CANON.values())

# canonical relator -> relator with swapped operands (absent: no mirror)
MIRROR = {
    "=": "=", "≠": "≠", "<": ">", ">": "<", "≤": "≥", "≥": "≤",
    "≡": "≡", "∼": "∼",
}

# lexeme-level mirror that keeps the author's spelling family
MIRROR_LEXEME = {
    "=": "=", "\\neq": "\\neq", "\\ne": "\\ne", "≠": "≠",
    "<": ">", ">": "<", "\\lt": "\\gt", "\\gt": "\\lt",
    "\\leq": "\\geq", "\\geq": "\\leq", "\\le": "\\ge", "\\ge": "\\le",
    "\\leqslant": "\\geqslant", "\\geqslant": "\\leqslant",
    "≤": "≥", "≥": "≤", "\\equiv": "\\equiv", "≡": "≡",
    "\\sim": "\\sim", "∼": "∼",
}

OPERATOR_COMMANDS = frozenset("""
cdot times div pm mp circ otimes oplus cup cap setminus wedge vee to mapsto
rightarrow Rightarrow Leftarrow leftarrow implies iff Leftrightarrow
""".split())

OPEN_GROUPS = {
    "{": "}", "(": ")", "[": "]", "\\{": "\\}", "\\langle": "\\rangle",
    "\\lVert": "\\rVert", "\\lvert": "\\rvert", "\\lfloor": "\\rfloor",
    "\\lceil": "\\rceil",
}
CLOSE_GROUPS = frozenset(OPEN_GROUPS.values())

# treated exactly like whitespace
LAYOUT_COMMANDS = frozenset("""
quad qquad displaystyle textstyle scriptstyle limits nolimits nonumber notag
left right big Big bigg Bigg bigl bigr Bigl Bigr
""".split())
LAYOUT_SYMBOLS = frozenset([",", ";", ":", "!", " ", "\\"])

# commands whose single braced argument is literal text
TEXT_COMMANDS = frozenset("text textrm textit mbox mathrm operatorname label".split())


@dataclass(frozen=True)
class MathToken:
    kind: str
    text: str
    offset: int

    @property
    def end(self) -> int:
        return self.offset + len(self.text)


class LatexSyntaxError(ValueError):
    """Malformed LaTeX math; ``offset`` points at the offending character."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


_NUMBER = re.compile(r"\d+(?:\.\d+)?|\.\d+")
_COMMAND = re.compile(r"\\([A-Za-z]+)|\\(.)", re.S)
_ENV = re.compile(r"\\(begin|end)\s*\{[^{}]*\}")


def _braced_text(src: str, start: int) -> int:
    """Return the index just past the brace group opening at ``start``."""
    depth = 0
    for i in range(start, len(src)):
        c = src[i]
        if c == "\\":
            continue
        if c == "{" and (i == 0 or src[i - 1] != "\\"):
            depth += 1
        elif c == "}" and src[i - 1] != "\\":
            depth -= 1
            if depth == 0:
                return i + 1
    raise LatexSyntaxError("unbalanced brace", start)


def tokenize_latex(src: str) -> list[MathToken]:
    """Split a math-mode LaTeX fragment into tokens.

    Raises :class:`LatexSyntaxError` naming the offset of the first
    unmatched group delimiter.
    """
    tokens: list[MathToken] = []
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c.isspace() or c == "&" or c == "~":
            i += 1
            continue
        if c == "\\":
            m = _ENV.match(src, i)
            if m:
                i = m.end()
                continue
            m = _COMMAND.match(src, i)
            if m is None:  # trailing backslash
                tokens.append(MathToken(COMMAND, c, i))
                i += 1
                continue
            lex = m.group(0)
            name = m.group(1)
            if name is None:
                sym = m.group(2)
                if sym in LAYOUT_SYMBOLS or sym.isspace():
                    i = m.end()
                    continue
                if lex in OPEN_GROUPS:
                    tokens.append(MathToken(OPEN_GROUP, lex, i))
                elif lex in CLOSE_GROUPS:
                    tokens.append(MathToken(CLOSE_GROUP, lex, i))
                else:
                    tokens.append(MathToken(OPERATOR, lex, i))
                i = m.end()
                continue
            if name in LAYOUT_COMMANDS:
                i = m.end()
                if name in ("left", "right") and i < n and src[i] == ".":
                    i += 1
                continue
            if name in TEXT_COMMANDS:
                j = m.end()
                while j < n and src[j].isspace():
                    j += 1
                if j < n and src[j] == "{":
                    end = _braced_text(src, j)
                    tokens.append(MathToken(COMMAND, src[i:end], i))
                    i = end
                    continue
            if lex in RELATOR_CANON:
                kind = RELATION
            elif lex in OPEN_GROUPS:
                kind = OPEN_GROUP
            elif lex in CLOSE_GROUPS:
                kind = CLOSE_GROUP
            elif name in GREEK:
                kind = IDENTIFIER
            elif name in OPERATOR_COMMANDS:
                kind = OPERATOR
            else:
                kind = COMMAND
            tokens.append(MathToken(kind, lex, i))
            i = m.end()
            continue
        m = _NUMBER.match(src, i)
        if m:
            tokens.append(MathToken(NUMBER, m.group(0), i))
            i = m.end()
            continue
        if c.isalpha():
            tokens.append(MathToken(IDENTIFIER, c, i))
        elif c in RELATOR_CANON:
            tokens.append(MathToken(RELATION, c, i))
        elif c in OPEN_GROUPS:
            tokens.append(MathToken(OPEN_GROUP, c, i))
        elif c in CLOSE_GROUPS:
            tokens.append(MathToken(CLOSE_GROUP, c, i))
        elif c == "_":
            tokens.append(MathToken(SUBSCRIPT, c, i))
        elif c == "^":
            tokens.append(MathToken(SUPERSCRIPT, c, i))
        else:
            tokens.append(MathToken(OPERATOR, c, i))
        i += 1
    _check_balance(tokens)
    return tokens


def _check_balance(tokens: list[MathToken]) -> None:
    # braces must pair exactly; other brackets may pair loosely, as in [0,1)
    stack: list[MathToken] = []
    for tok in tokens:
        if tok.kind == OPEN_GROUP:
            stack.append(tok)
        elif tok.kind == CLOSE_GROUP:
            if not stack:
                raise LatexSyntaxError(f"unmatched {tok.text!r}", tok.offset)
            top = stack[-1]
            if (top.text == "{") != (tok.text == "}"):
                bad = top if top.text == "{" else tok
                raise LatexSyntaxError(f"unmatched {bad.text!r}", bad.offset)
            stack.pop()
    if stack:
        raise LatexSyntaxError(f"unmatched {stack[0].text!r}", stack[0].offset)
