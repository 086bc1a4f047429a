"""Tree to LaTeX rendering.

Parsed trees render back to their source modulo whitespace.  Synthesized
trees get parentheses wherever re-parsing would otherwise bind differently;
the inserted parentheses come back as ``(`` fences, which :func:`normalize`
removes, so ``normalize(parse(render(t))) == normalize(t)``.
"""

from __future__ import annotations

from .nodes import ExprNode, FuncApply, Identifier, Number, OpApply, Relation, Scripted, Sequence
from .parser import ADD_OPS, ARROW_OPS, POSTFIX_OPS, PREFIX_OPS, is_function_head, join_lexemes

__all__ = ["render", "render_tokens", "identifier_lexeme"]

SEQ, ARROW, REL, ADD, MUL, PREFIX, BARE, POST, ATOM = 0, 1, 2, 3, 4, 5, 7, 8, 9

# operand contexts
STMT = "stmt"    # a leading sign parses with a multiplicative operand
TIGHT = "tight"  # a sign parses with a postfix-level operand
OTHER = "other"  # a sign cannot appear unparenthesized


def identifier_lexeme(node: Identifier) -> str:
    if node.text is not None:
        return node.text
    name = node.name
    base, sep, sub = name.partition("_")
    if not sep or not base:
        return name
    if len(sub) == 1 or (sub.startswith("\\") and sub[1:].isalpha()):
        return f"{base}_{sub}"
    return f"{base}_{{{sub}}}"


def _is_prefix(node: ExprNode) -> bool:
    return isinstance(node, OpApply) and not node.is_fence and len(node.operands) == 1 \
        and node.op in PREFIX_OPS


def level(node: ExprNode) -> int:
    if isinstance(node, Sequence):
        return SEQ
    if isinstance(node, Relation):
        return REL
    if isinstance(node, OpApply):
        if node.is_fence:
            return ATOM
        if len(node.operands) == 1:
            return POST if node.op in POSTFIX_OPS else PREFIX
        if node.op in ARROW_OPS:
            return ARROW
        if node.op in ADD_OPS:
            return ADD
        return MUL
    if isinstance(node, FuncApply):
        if not node.args:
            return ATOM
        return BARE if node.style == "bare" else POST
    if isinstance(node, Scripted):
        return POST
    return ATOM


def _rightmost(node: ExprNode) -> ExprNode:
    while isinstance(node, OpApply) and not node.is_fence and len(node.operands) == 2:
        node = node.operands[1]
    return node


class _Renderer:
    def __init__(self):
        self.out: list[str] = []

    def child(self, node: ExprNode, min_level: int, ctx: str) -> None:
        if _is_prefix(node):
            inner = level(node.operands[0])
            ok = (ctx == STMT and inner >= MUL) or (ctx == TIGHT and inner >= BARE)
            if not ok:
                self.paren(node)
                return
        elif level(node) < min_level:
            self.paren(node)
            return
        self.node(node)

    def paren(self, node: ExprNode) -> None:
        self.out.append("(")
        self.node(node)
        self.out.append(")")

    def script(self, arg: ExprNode) -> None:
        if isinstance(arg, OpApply) and arg.op == "{" and arg.is_fence:
            self.node(arg)
        elif isinstance(arg, Identifier) and len(identifier_lexeme(arg)) == 1 or (
                isinstance(arg, Identifier) and "_" not in arg.name and arg.name.startswith("\\")):
            self.node(arg)
        elif isinstance(arg, Number) and len(arg.value) == 1:
            self.node(arg)
        elif _is_prefix(arg) and level(arg.operands[0]) >= BARE:
            self.node(arg)
        else:
            self.out.append("{")
            self.child(arg, SEQ, STMT)
            self.out.append("}")

    def brace_arg(self, arg: ExprNode) -> None:
        if isinstance(arg, OpApply) and arg.op == "{" and arg.is_fence:
            self.node(arg)
        elif isinstance(arg, (Identifier, Number)) and len(self._leaf(arg)) == 1:
            self.node(arg)
        else:
            self.out.append("{")
            self.child(arg, SEQ, STMT)
            self.out.append("}")

    @staticmethod
    def _leaf(node: ExprNode) -> str:
        return identifier_lexeme(node) if isinstance(node, Identifier) else node.value

    def node(self, node: ExprNode) -> None:
        out = self.out
        if isinstance(node, Identifier):
            out.append(identifier_lexeme(node))
        elif isinstance(node, Number):
            out.append(node.value)
        elif isinstance(node, Sequence):
            for k, item in enumerate(node.items):
                self.child(item, ARROW, STMT)
                if k < len(node.separators):
                    out.append(node.separators[k])
        elif isinstance(node, Relation):
            for k, operand in enumerate(node.operands):
                if k:
                    out.append(node.relators[k - 1])
                self.child(operand, ADD, STMT)
        elif isinstance(node, OpApply):
            self.op_apply(node)
        elif isinstance(node, FuncApply):
            self.func_apply(node)
        elif isinstance(node, Scripted):
            base = node.base
            if isinstance(base, Scripted) and (
                    (node.sub is not None and base.sub is None)
                    or (node.sup is not None and base.sup is None)):
                self.paren(base)
            else:
                self.child(base, POST, OTHER)
            if node.sub is not None:
                out.append("_")
                self.script(node.sub)
            if node.sup is not None:
                out.append("^")
                self.script(node.sup)
        else:  # pragma: no cover
            raise TypeError(f"cannot render {type(node).__name__}")

    def op_apply(self, node: OpApply) -> None:
        out = self.out
        if node.is_fence:
            out.append(node.op)
            for operand in node.operands:
                self.child(operand, SEQ, STMT)
            out.append(node.close)
            return
        if len(node.operands) == 1:
            if node.op in POSTFIX_OPS:
                self.child(node.operands[0], POST, OTHER)
                out.append(node.op)
            else:
                out.append(node.op)
                # a sign inside the operand binds tighter than the operand itself
                self.child(node.operands[0], MUL, TIGHT)
            return
        left, right = node.operands
        if node.op in ARROW_OPS:
            self.child(left, ARROW, STMT)
            out.append(node.op)
            self.child(right, REL, STMT)
        elif node.op in ADD_OPS:
            self.child(left, ADD, STMT)
            out.append(node.op)
            self.child(right, MUL, TIGHT)
        elif node.op == "":
            self.child(left, MUL, OTHER)
            mark = len(out)
            self.child(right, BARE, OTHER)
            rm = _rightmost(left)
            if len(out) > mark and out[mark] == "(" and is_function_head(rm):
                out.insert(mark, "\\cdot")
        else:
            self.child(left, MUL, OTHER)
            out.append(node.op)
            self.child(right, BARE, TIGHT)

    def func_apply(self, node: FuncApply) -> None:
        out = self.out
        if isinstance(node.head, ExprNode):
            self.child(node.head, POST + 1, OTHER)
        else:
            out.append(node.head)
        if not node.args:
            if node.style == "paren":
                out.extend(["(", ")"])
            return
        if node.style == "paren":
            out.append("(")
            for k, arg in enumerate(node.args):
                if k:
                    out.append(",")
                self.child(arg, ARROW, STMT)
            out.append(")")
        elif node.style == "bare":
            self.child(node.args[0], BARE, OTHER)
        elif node.style == "index":
            out.append("[")
            self.child(node.args[1], SEQ, STMT)
            out.append("]")
            self.brace_arg(node.args[0])
        else:
            for arg in node.args:
                self.brace_arg(arg)


def render_tokens(node: ExprNode) -> list[str]:
    r = _Renderer()
    r.node(node)
    return r.out


def render(node: ExprNode) -> str:
    """Render ``node`` as compact LaTeX."""
    return join_lexemes(render_tokens(node))
