import random

import pytest
from hypothesis import given, settings, strategies as st

from mathreuse.mathparse import (
    FuncApply, Identifier, LatexSyntaxError, Number, OpApply, ParseError, Relation, alpha_equivalent,
    identifier_leaves, identifiers, leaves, maximal_expressions, normalize, parse_latex, relator_kind,
    render, strip_spans, tokenize_latex, walk,
)
from mathreuse.mathparse.lexer import MIRROR
from mathreuse.obfuscate import rename_identifiers
from strategies import formulas


def tree(src):
    return strip_spans(parse_latex(src))


# -- tokenizer ----------------------------------------------------------------

def test_tokenize_simple_sum():
    assert [(t.kind, t.text) for t in tokenize_latex("x+3")] == [
        ("identifier", "x"), ("operator", "+"), ("number", "3")]


def test_tokenize_empty():
    assert tokenize_latex("") == []


def test_tokenize_frac():
    kinds = [(t.kind, t.text) for t in tokenize_latex(r"\frac{a}{b}")]
    assert kinds == [("command", r"\frac"), ("open-group", "{"), ("identifier", "a"),
                     ("close-group", "}"), ("open-group", "{"), ("identifier", "b"),
                     ("close-group", "}")]


def test_tokenize_unknown_command_is_kept():
    toks = tokenize_latex(r"\foo x")
    assert toks[0].kind == "command" and toks[0].text == r"\foo"


def test_tokenize_unbalanced_brace_reports_offset():
    with pytest.raises(LatexSyntaxError) as info:
        tokenize_latex("x+{y")
    assert info.value.offset == 2


def test_tokenize_offsets_increase():
    offs = [t.offset for t in tokenize_latex(r"\alpha_1 + \frac{x}{y} \leq 2")]
    assert offs == sorted(set(offs))


# -- parser -------------------------------------------------------------------

def test_parse_statement():
    assert tree("a+2=0") == Relation(("=",), (OpApply("+", (Identifier("a"), Number("2"))), Number("0")))


def test_parse_leq():
    assert tree(r"x \leq 1") == Relation((r"\leq",), (Identifier("x"), Number("1")))


def test_parse_function_application():
    t = tree("f(x)")
    assert isinstance(t, FuncApply) and t.head == Identifier("f") and t.args == (Identifier("x"),)


def test_parse_precedence():
    # juxtaposition binds tighter than +, scripts tighter than juxtaposition
    t = tree("a+bc^2")
    assert isinstance(t, OpApply) and t.op == "+"
    prod = t.operands[1]
    assert prod.op == "" and prod.operands[0] == Identifier("b")


def test_parse_chain_is_one_relation():
    t = tree("a=b=c")
    assert isinstance(t, Relation) and len(t.operands) == 3 and t.relators == ("=", "=")


@pytest.mark.parametrize("src, offset", [("x+", 1), ("", 0)])
def test_parse_errors_carry_offset(src, offset):
    with pytest.raises(ParseError) as info:
        parse_latex(src)
    assert info.value.offset == offset


def test_spans_nest():
    t = parse_latex(r"\frac{a+b}{c}=d_1")
    for node in walk(t):
        for child in walk(node):
            if child.span and node.span:
                assert node.span[0] <= child.span[0] <= child.span[1] <= node.span[1]


# -- structure ----------------------------------------------------------------

def test_maximal_expressions_of_statement():
    assert maximal_expressions(tree("a+2=0")) == [tree("a+2"), tree("0")]


def test_maximal_expressions_without_relator():
    assert maximal_expressions(tree("x+1")) == [tree("x+1")]


def test_maximal_expressions_chain():
    assert maximal_expressions(tree("a=b=c")) == [tree("a"), tree("b"), tree("c")]


def test_identifiers_examples():
    assert identifiers(tree("F=ma")) == ["F", "m", "a"]
    assert identifiers(tree("a+2=0")) == ["a"]
    assert identifiers(tree(r"\langle x+y,x+y\rangle")) == ["x", "y", "x", "y"]


def test_scripted_identifier_counts_once():
    assert identifiers(tree("x_1+x_2")) == ["x_1", "x_2"]


def test_function_names_are_not_identifiers():
    assert identifiers(tree(r"\sin x + \log y")) == ["x", "y"]


@pytest.mark.parametrize("src, canonical", [
    ("1.0", "1"),
    ("x+1", "x+1"),
    (r"\frac{a}{b}", "a/b"),
    (r"x^{1/2}", r"\sqrt{x}"),
    (r"a\cdot b", "ab"),
])
def test_normalize_table(src, canonical):
    assert strip_spans(normalize(parse_latex(src))) == strip_spans(normalize(parse_latex(canonical)))


def test_normalize_fraction_matches_slash():
    assert strip_spans(normalize(parse_latex(r"\frac{a}{b}"))) == tree("a/b")


def test_alpha_equivalent_examples():
    f, g = normalize(parse_latex("f(x)")), normalize(parse_latex("g(x)"))
    assert alpha_equivalent(f, g) == {"f": "g", "x": "x"}
    assert alpha_equivalent(tree("x+1"), tree("x+1")) == {"x": "x"}
    assert alpha_equivalent(tree("x+x"), tree("y+z")) is None


def test_relator_mirrors():
    assert relator_kind("=").mirror == "="
    assert relator_kind(r"\leq").mirror == "≥"
    assert relator_kind("<").mirror == ">"
    for a, b in MIRROR.items():
        assert MIRROR.get(b) == a


# -- properties ---------------------------------------------------------------

@settings(max_examples=300, deadline=None)
@given(formulas)
def test_tokens_reproduce_source(src):
    lexemes = "".join(t.text for t in tokenize_latex(src))
    assert lexemes.replace(" ", "") == src.replace(" ", "")


@settings(max_examples=300, deadline=None)
@given(formulas)
def test_render_parse_round_trip(src):
    t = parse_latex(src)
    assert tree(render(t)) == strip_spans(t)


@settings(max_examples=500, deadline=None)
@given(formulas)
def test_normalized_render_parse_round_trip(src):
    n = strip_spans(normalize(parse_latex(src)))
    assert strip_spans(normalize(parse_latex(render(n)))) == n


def test_nested_sign_keeps_grouping():
    n = normalize(parse_latex(r"-(-(\frac{q}{6}))"))
    assert render(n) == "-(-q/6)"
    assert strip_spans(normalize(parse_latex(render(n)))) == strip_spans(n)


@settings(max_examples=300, deadline=None)
@given(formulas)
def test_normalize_idempotent(src):
    n = normalize(parse_latex(src))
    assert normalize(n) == n


@settings(max_examples=300, deadline=None)
@given(formulas)
def test_maximal_expressions_are_relation_free(src):
    for m in maximal_expressions(parse_latex(src)):
        assert not any(isinstance(n, Relation) for n in walk(m))


@settings(max_examples=300, deadline=None)
@given(formulas)
def test_identifier_count_matches_leaves(src):
    t = parse_latex(src)
    assert len(identifiers(t)) == sum(isinstance(n, Identifier) for n in leaves(t))
    assert len(identifier_leaves(t)) == len(identifiers(t))


def _permutation(names, rng):
    pool = sorted(set("abcdeklmnpqrstuvwxyz") | set(names) - set("fgh"))
    plain = sorted(n for n in set(names) if n not in "fgh")
    image = rng.sample(pool, len(plain))
    mapping = dict(zip(plain, image))
    mapping.update({n: n for n in names if n in "fgh"})
    return mapping


@settings(max_examples=200, deadline=None)
@given(formulas, st.integers(0, 2**32))
def test_alpha_equivalence_is_an_equivalence(src, seed):
    rng = random.Random(seed)
    e1 = normalize(parse_latex(src))
    names = identifiers(e1)
    m12 = _permutation(names, rng)
    e2 = normalize(rename_identifiers(e1, m12))
    m23 = _permutation(identifiers(e2), rng)
    e3 = normalize(rename_identifiers(e2, m23))
    ident = {n: n for n in names}
    assert alpha_equivalent(e1, e1) == ident
    fwd = alpha_equivalent(e1, e2)
    assert fwd == {n: m12[n] for n in names}
    assert alpha_equivalent(e2, e1) == {v: k for k, v in fwd.items()}
    assert alpha_equivalent(e1, e3) == {n: m23[m12[n]] for n in names}
