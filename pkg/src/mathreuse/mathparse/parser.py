"""Recursive-descent parser from :class:`MathToken` sequences to expression trees.

Binding, tightest first: scripts and postfix marks, function application,
multiplication (explicit or juxtaposition), ``+``/``-``, relators, arrows,
then separators (``,`` ``;`` and trailing ``.``).  All binary operators are
left associative.
"""

from __future__ import annotations

from typing import Optional

from .lexer import (
    CLOSE_GROUP, COMMAND, IDENTIFIER, NUMBER, OPEN_GROUP, OPERATOR, RELATION,
    SUBSCRIPT, SUPERSCRIPT, LatexSyntaxError, MathToken, tokenize_latex,
)
from .nodes import (
    ExprNode, FuncApply, Identifier, Number, OpApply, Relation, Scripted, Sequence,
)

__all__ = ["ParseError", "parse_formula", "parse_latex", "join_lexemes"]


class ParseError(LatexSyntaxError):
    pass


ADD_OPS = frozenset(["+", "-", "\\pm", "\\mp", "\\cup", "\\cap", "\\setminus",
                     "\\oplus", "\\vee", "\\wedge"])
MUL_OPS = frozenset(["\\cdot", "\\times", "/", "\\div", "\\circ", "\\otimes", "*"])
ARROW_OPS = frozenset(["\\to", "\\mapsto", "\\rightarrow", "\\Rightarrow",
                       "\\Leftarrow", "\\leftarrow", "\\implies", "\\iff",
                       "\\Leftrightarrow", ":"])
PREFIX_OPS = frozenset(["-", "+", "\\pm", "\\mp"])
POSTFIX_OPS = frozenset(["'", "!"])
SEPARATORS = frozenset([",", ";", "."])
ABS_BARS = frozenset(["|", "\\|"])

TWO_ARG = frozenset(["\\frac", "\\dfrac", "\\tfrac", "\\binom"])
ONE_ARG = frozenset("""\\mathbb \\mathcal \\mathbf \\mathfrak \\mathsf \\boldsymbol
\\bar \\overline \\underline \\hat \\widehat \\tilde \\widetilde \\vec \\dot \\ddot""".split())
FUNCTIONS = frozenset("""\\sin \\cos \\tan \\cot \\sec \\csc \\sinh \\cosh \\tanh
\\arcsin \\arccos \\arctan \\log \\ln \\lg \\exp \\det \\arg \\deg \\dim \\ker
\\gcd \\Pr \\Re \\Im \\hom""".split())

FUNCTION_LETTERS = frozenset("fgh") | frozenset(chr(c) for c in range(ord("A"), ord("Z") + 1))


def join_lexemes(lexemes) -> str:
    """Concatenate lexemes, inserting a space only where re-lexing needs one."""
    out: list[str] = []
    prev = ""
    for lex in lexemes:
        if not lex:
            continue
        if prev:
            if prev[-1].isalpha() and prev.startswith("\\") and (lex[0].isalpha() or lex[0].isdigit()):
                out.append(" ")
            elif (prev[-1].isdigit() or prev[-1] == ".") and (lex[0].isdigit() or lex[0] == "."):
                out.append(" ")
        out.append(lex)
        prev = lex
    return "".join(out)


def is_function_head(node: ExprNode) -> bool:
    return isinstance(node, Identifier) and node.name[:1] in FUNCTION_LETTERS


class _Parser:
    def __init__(self, tokens: list[MathToken]):
        self.toks = tokens
        self.i = 0
        self.bars: list[str] = []

    # -- token helpers -------------------------------------------------
    def peek(self, k: int = 0) -> Optional[MathToken]:
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def take(self) -> MathToken:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def span_from(self, start: int) -> tuple[int, int]:
        return (self.toks[start].offset, self.toks[self.i - 1].end)

    def at_op(self, ops) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == OPERATOR and tok.text in ops

    def error(self, msg: str, tok: Optional[MathToken] = None) -> ParseError:
        if tok is None:
            tok = self.peek()
        off = tok.offset if tok is not None else (self.toks[-1].end if self.toks else 0)
        return ParseError(msg, off)

    def starts_operand(self, tok: Optional[MathToken]) -> bool:
        if tok is None:
            return False
        if tok.kind in (IDENTIFIER, NUMBER, OPEN_GROUP, COMMAND):
            return True
        if tok.kind == OPERATOR and tok.text in ABS_BARS:
            return not (self.bars and self.bars[-1] == tok.text)
        return False

    def need_operand(self, op: MathToken) -> None:
        tok = self.peek()
        if not (self.starts_operand(tok) or (tok is not None and tok.kind == OPERATOR
                                              and tok.text in PREFIX_OPS)):
            raise self.error(f"dangling operator {op.text!r}", op)

    # -- grammar -------------------------------------------------------
    def statement_list(self) -> ExprNode:
        start = self.i
        items = [self.arrow()]
        seps: list[str] = []
        while self.at_op(SEPARATORS):
            seps.append(self.take().text)
            nxt = self.peek()
            if nxt is None or nxt.kind == CLOSE_GROUP or (
                    nxt.kind == OPERATOR and nxt.text in ABS_BARS and not self.starts_operand(nxt)):
                break
            items.append(self.arrow())
        if len(items) == 1 and not seps:
            return items[0]
        return Sequence(tuple(items), tuple(seps), span=self.span_from(start))

    def arrow(self) -> ExprNode:
        start = self.i
        left = self.relation()
        while self.at_op(ARROW_OPS):
            op = self.take()
            self.need_operand(op)
            right = self.relation()
            left = OpApply(op.text, (left, right), span=self.span_from(start))
        return left

    def relation(self) -> ExprNode:
        start = self.i
        tok = self.peek()
        if tok is not None and tok.kind == RELATION:
            raise self.error(f"relator {tok.text!r} without left operand", tok)
        operands = [self.additive()]
        relators: list[str] = []
        while (tok := self.peek()) is not None and tok.kind == RELATION:
            op = self.take()
            self.need_operand(op)
            relators.append(op.text)
            operands.append(self.additive())
        if not relators:
            return operands[0]
        return Relation(tuple(relators), tuple(operands), span=self.span_from(start))

    def additive(self) -> ExprNode:
        start = self.i
        if self.at_op(PREFIX_OPS):
            op = self.take()
            self.need_operand(op)
            left: ExprNode = OpApply(op.text, (self.multiplicative(),), span=self.span_from(start))
        else:
            left = self.multiplicative()
        while self.at_op(ADD_OPS):
            op = self.take()
            self.need_operand(op)
            right = self.multiplicative()
            left = OpApply(op.text, (left, right), span=self.span_from(start))
        return left

    def multiplicative(self) -> ExprNode:
        start = self.i
        left = self.postfix()
        while True:
            if self.at_op(MUL_OPS):
                op = self.take()
                self.need_operand(op)
                right = self.postfix()
                left = OpApply(op.text, (left, right), span=self.span_from(start))
            elif self.starts_operand(self.peek()):
                right = self.postfix()
                left = OpApply("", (left, right), span=self.span_from(start))
            else:
                return left

    def postfix(self) -> ExprNode:
        start = self.i
        node = self.primary()
        open_script = False  # node is a Scripted built here with a free slot
        while (tok := self.peek()) is not None:
            if tok.kind in (SUBSCRIPT, SUPERSCRIPT):
                self.take()
                arg_start = self.i
                arg = self.script_arg(tok)
                slot = "sub" if tok.kind == SUBSCRIPT else "sup"
                if (slot == "sub" and isinstance(node, Identifier) and not open_script
                        and _simple_subscript(arg)):
                    text = join_lexemes([node.text or node.name, "_"] +
                                        [t.text for t in self.toks[arg_start:self.i]])
                    node = Identifier(node.name + "_" + _subscript_name(arg), text,
                                      span=self.span_from(start))
                    continue
                if open_script and getattr(node, slot) is None:
                    node = Scripted(node.base, **{**{"sub": node.sub, "sup": node.sup}, slot: arg},
                                    span=self.span_from(start))
                else:
                    node = Scripted(node, **{slot: arg}, span=self.span_from(start))
                open_script = True
            elif tok.kind == OPERATOR and tok.text in POSTFIX_OPS:
                self.take()
                node = OpApply(tok.text, (node,), span=self.span_from(start))
                open_script = False
            elif tok.kind == OPEN_GROUP and tok.text == "(" and is_function_head(node):
                args = self.paren_args()
                node = FuncApply(node, args, "paren", span=self.span_from(start))
                open_script = False
            else:
                break
        return node

    def paren_args(self) -> tuple[ExprNode, ...]:
        open_tok = self.take()
        nxt = self.peek()
        if nxt is not None and nxt.kind == CLOSE_GROUP:
            self.take()
            return ()
        inner = self.statement_list()
        self.expect_close(open_tok)
        if isinstance(inner, Sequence) and all(s == "," for s in inner.separators) \
                and len(inner.separators) == len(inner.items) - 1:
            return inner.items
        return (inner,)

    def expect_close(self, open_tok: MathToken) -> MathToken:
        tok = self.peek()
        if tok is None or tok.kind != CLOSE_GROUP:
            raise self.error(f"expected closing delimiter for {open_tok.text!r}", tok)
        return self.take()

    def group(self) -> ExprNode:
        start = self.i
        open_tok = self.take()
        saved, self.bars = self.bars, []
        nxt = self.peek()
        if nxt is not None and nxt.kind == CLOSE_GROUP:
            close = self.take()
            self.bars = saved
            return OpApply(open_tok.text, (), close.text, span=self.span_from(start))
        inner = self.statement_list()
        close = self.expect_close(open_tok)
        self.bars = saved
        return OpApply(open_tok.text, (inner,), close.text, span=self.span_from(start))

    def script_arg(self, marker: MathToken) -> ExprNode:
        tok = self.peek()
        if tok is None:
            raise self.error(f"missing argument after {marker.text!r}", marker)
        if tok.kind == OPEN_GROUP and tok.text == "{":
            return self.group()
        if tok.kind in (IDENTIFIER, NUMBER):
            self.take()
            return self.leaf(tok)
        if tok.kind == COMMAND or (tok.kind == OPERATOR and tok.text in PREFIX_OPS):
            return self.primary()
        if tok.kind == OPERATOR and tok.text in POSTFIX_OPS:  # x^\prime-like marks
            self.take()
            return Identifier(tok.text, span=(tok.offset, tok.end))
        raise self.error(f"bad script argument {tok.text!r}", tok)

    def brace_arg(self, cmd: MathToken) -> ExprNode:
        tok = self.peek()
        if tok is None:
            raise self.error(f"missing argument for {cmd.text}", cmd)
        if tok.kind == OPEN_GROUP and tok.text == "{":
            return self.group()
        if tok.kind in (IDENTIFIER, NUMBER):
            self.take()
            if tok.kind == NUMBER and len(tok.text) > 1 and tok.text.isdigit():
                # \frac12 style: one digit per argument
                head, rest = tok.text[0], tok.text[1:]
                self.toks[self.i - 1:self.i] = [
                    MathToken(NUMBER, head, tok.offset),
                    MathToken(NUMBER, rest, tok.offset + 1),
                ]
                return Number(head, span=(tok.offset, tok.offset + 1))
            return self.leaf(tok)
        if tok.kind == COMMAND:
            return self.primary()
        raise self.error(f"bad argument for {cmd.text}", tok)

    def leaf(self, tok: MathToken) -> ExprNode:
        span = (tok.offset, tok.end)
        if tok.kind == NUMBER:
            return Number(tok.text, span=span)
        name = tok.text[1:] if tok.text.startswith("\\") else tok.text
        return Identifier("\\" + name if tok.text.startswith("\\") else name, tok.text, span=span)

    def primary(self) -> ExprNode:
        start = self.i
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of formula")
        if tok.kind in (IDENTIFIER, NUMBER):
            self.take()
            return self.leaf(tok)
        if tok.kind == OPEN_GROUP:
            return self.group()
        if tok.kind == OPERATOR and tok.text in ABS_BARS and self.starts_operand(tok):
            open_tok = self.take()
            self.bars.append(open_tok.text)
            if not self.starts_operand(self.peek()) and not self.at_op(PREFIX_OPS):
                raise self.error(f"empty {open_tok.text!r} group", open_tok)
            inner = self.statement_list()
            self.bars.pop()
            close = self.peek()
            if close is None or close.text != open_tok.text:
                raise self.error(f"unclosed {open_tok.text!r}", open_tok)
            self.take()
            return OpApply(open_tok.text, (inner,), close.text, span=self.span_from(start))
        if tok.kind == OPERATOR and tok.text in PREFIX_OPS:
            op = self.take()
            self.need_operand(op)
            return OpApply(op.text, (self.postfix(),), span=self.span_from(start))
        if tok.kind == COMMAND:
            return self.command()
        raise self.error(f"unexpected {tok.text!r}", tok)

    def command(self) -> ExprNode:
        start = self.i
        cmd = self.take()
        name = cmd.text
        if "{" in name:  # \text{...} and friends, kept opaque
            return FuncApply(name, (), "bare", span=self.span_from(start))
        if name in TWO_ARG:
            a = self.brace_arg(cmd)
            b = self.brace_arg(cmd)
            return FuncApply(name, (a, b), "brace", span=self.span_from(start))
        if name == "\\sqrt":
            index = None
            nxt = self.peek()
            if nxt is not None and nxt.text == "[":
                open_tok = self.take()
                index = self.statement_list()
                self.expect_close(open_tok)
            arg = self.brace_arg(cmd)
            if index is None:
                return FuncApply(name, (arg,), "brace", span=self.span_from(start))
            return FuncApply(name, (arg, index), "index", span=self.span_from(start))
        if name in ONE_ARG:
            return FuncApply(name, (self.brace_arg(cmd),), "brace", span=self.span_from(start))
        nxt = self.peek()
        if name in FUNCTIONS and nxt is not None:
            if nxt.kind == OPEN_GROUP and nxt.text == "(":
                return FuncApply(name, self.paren_args(), "paren", span=self.span_from(start))
            if self.starts_operand(nxt):
                return FuncApply(name, (self.postfix(),), "bare", span=self.span_from(start))
        # opaque command: swallow directly following brace groups as arguments
        args = []
        while (nxt := self.peek()) is not None and nxt.kind == OPEN_GROUP and nxt.text == "{":
            args.append(self.group())
        return FuncApply(name, tuple(args), "brace" if args else "bare", span=self.span_from(start))


def _simple_subscript(arg: ExprNode) -> bool:
    if isinstance(arg, (Identifier, Number)):
        return True
    if isinstance(arg, OpApply) and arg.op == "{" and len(arg.operands) == 1:
        inner = arg.operands[0]
        while isinstance(inner, OpApply) and inner.op == "" and len(inner.operands) == 2:
            if not isinstance(inner.operands[1], (Identifier, Number)):
                return False
            inner = inner.operands[0]
        return isinstance(inner, (Identifier, Number))
    return False


def _subscript_name(arg: ExprNode) -> str:
    if isinstance(arg, Identifier):
        return arg.name
    if isinstance(arg, Number):
        return arg.value
    if isinstance(arg, OpApply) and arg.op == "{":
        return _subscript_name(arg.operands[0])
    # juxtaposition chain of leaves
    return _subscript_name(arg.operands[0]) + _subscript_name(arg.operands[1])


def parse_formula(tokens: list[MathToken]) -> ExprNode:
    """Parse a token sequence produced by :func:`tokenize_latex`."""
    if not tokens:
        raise ParseError("empty formula", 0)
    p = _Parser(list(tokens))
    node = p.statement_list()
    if p.i < len(p.toks):
        tok = p.toks[p.i]
        raise ParseError(f"unexpected {tok.text!r}", tok.offset)
    return node


def parse_latex(src: str) -> ExprNode:
    return parse_formula(tokenize_latex(src))
