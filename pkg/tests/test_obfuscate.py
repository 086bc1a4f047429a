import json
import logging
import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from mathreuse.docmodel import ObfuscationOperator, segment_document
from mathreuse.mathparse import (
    alpha_equivalent, identifiers, maximal_expressions, normalize, parse_latex, render, strip_spans,
)
from mathreuse.obfuscate import (
    AmbiguityError, Clause, Edit, FreshNamePolicy, InapplicableError, Lexicon, RecipeError,
    RenameError, RewriteRule, SubstitutionError, apply_edits, apply_formula_manipulation,
    apply_insert_delete, apply_paraphrase, apply_presentation, apply_substitution, apply_tmmt,
    apply_variation_of_subject, derive_seed, entity_token_count, fm_rules, generate_pair,
    generate_pair_traced, load_lexicon, load_recipes, load_rules, map_position, mirror_relation,
    numerically_equivalent, parse_recipe, passages, present_document, resolve_substitutions,
)
from mathreuse.obfuscate.edits import TraceEdit
from oracles import ProvenanceReplay
from strategies import formulas

EMPTY = Lexicon({}, [], {}, [])


def doc(raw, doc_id="s"):
    return segment_document(doc_id, raw)


def rule(name):
    return next(r for r in load_rules() if r.name == name)


def canon(src):
    return strip_spans(normalize(parse_latex(src)))


# -- edits ----------------------------------------------------------------------

def test_apply_edits_rejects_overlap():
    with pytest.raises(ValueError):
        apply_edits(doc("abcdef"), [Edit(0, 3, "x"), Edit(2, 4, "y")], ObfuscationOperator.P, 0)


def test_apply_edits_drops_identity_edits():
    out, trace = apply_edits(doc("abc"), [Edit(0, 1, "a")], ObfuscationOperator.P, 0)
    assert out.raw == "abc" and not trace


def test_apply_edits_trace_coordinates():
    out, trace = apply_edits(doc("abcdef"), [Edit(1, 2, "XYZ"), Edit(4, 6, "")], ObfuscationOperator.P, 0)
    assert out.raw == "aXYZcd"
    assert [(e.original, e.replacement) for e in trace.edits] == [((1, 2), (1, 4)), ((4, 6), (6, 6))]


def test_map_position():
    edits = [TraceEdit((2, 4), (2, 7), "r"), TraceEdit((6, 6), (9, 11), "i")]
    assert map_position(1, edits, False) == 1
    assert map_position(3, edits, False) == 2 and map_position(3, edits, True) == 7
    assert map_position(5, edits, False) == 8
    # an insertion at the position is absorbed by right boundaries only
    assert map_position(6, edits, False) == 9 and map_position(6, edits, True) == 11
    assert map_position(10, edits, True) == 15


# -- paraphrase -----------------------------------------------------------------

def test_mirror_relation_examples():
    assert render(mirror_relation(parse_latex(r"x\leq 1"))) == r"1\geq x"
    assert render(mirror_relation(parse_latex("a=b"))) == "b=a"


def test_mirror_relation_involution():
    t = strip_spans(parse_latex("a<b+c"))
    assert strip_spans(mirror_relation(mirror_relation(t))) == t


def test_mirror_relation_without_mirror():
    with pytest.raises(InapplicableError):
        mirror_relation(parse_latex(r"x\in S"))


def test_paraphrase_identity_with_nothing_to_do():
    src = doc(r"The proof reduces to showing that $x\leq 1$.")
    out, trace = apply_paraphrase(src, EMPTY, seed=3, mirror=False)
    assert out.raw == src.raw and not trace


def test_paraphrase_skips_unmirrorable_relation():
    out, trace = apply_paraphrase(doc(r"so $x\in S$ holds"), EMPTY, seed=0)
    assert out.raw == r"so $x\in S$ holds" and trace.skipped


def test_paraphrase_deterministic():
    src = doc(r"Hence $a<b$ and $c=d$. The proof reduces to showing that $x\leq 1$.")
    assert apply_paraphrase(src, load_lexicon(), 7)[0].raw == apply_paraphrase(src, load_lexicon(), 7)[0].raw


def _maxexpr_multiset(d):
    out = Counter()
    for run in d.math_runs():
        for m in maximal_expressions(normalize(run.tree)):
            out[render(strip_spans(m))] += 1
    return out


@settings(max_examples=150, deadline=None)
@given(st.lists(formulas, min_size=1, max_size=3), st.integers(0, 2**32))
def test_paraphrase_preserves_maximal_expressions(fs, seed):
    src = doc(" then ".join(f"${f}$" for f in fs) + ".")
    out, _ = apply_paraphrase(src, load_lexicon(), seed)
    assert _maxexpr_multiset(out) == _maxexpr_multiset(src)


# -- insertions and deletions -------------------------------------------------------

def test_insert_then_delete_round_trip():
    src = doc("We have $a(b+c)=d$ here.")
    ins, t1 = apply_insert_delete(src, "insert", seed=4, site="chain")
    assert t1 and ins.raw != src.raw
    back, t2 = apply_insert_delete(ins, "delete", seed=4, site="chain")
    assert back.raw == src.raw and t2


def test_filler_insert_keeps_formulas():
    src = doc("We have $x=1$. Then $y=2$ follows.")
    out, trace = apply_insert_delete(src, "insert", seed=1, site="filler")
    assert len(out.raw) > len(src.raw)
    assert [r.latex for r in out.math_runs()] == [r.latex for r in src.math_runs()]
    back, _ = apply_insert_delete(out, "delete", seed=1, site="filler")
    assert back.raw == src.raw


def test_insert_without_site_is_identity():
    out, trace = apply_insert_delete(doc("$x$"), "insert", seed=0, site="chain")
    assert out.raw == "$x$" and not trace


def test_delete_without_marked_segment_is_identity():
    out, trace = apply_insert_delete(doc("plain text only."), "delete", seed=0)
    assert out.raw == "plain text only." and not trace


# -- substitutions -----------------------------------------------------------------

def test_substitution_single_leaf_side():
    new, clauses, _ = apply_substitution(parse_latex("x=y+1"), FreshNamePolicy(), seed=0)
    assert render(new) == "x=A(y)" and [c.latex() for c in clauses] == ["A(y)=y+1"]


def test_substitution_skips_used_names():
    new, clauses, _ = apply_substitution(parse_latex("A+x=y+1"), FreshNamePolicy(), seed=0)
    assert [c.name for c in clauses] == ["B", "C"]


def test_substitution_name_exhaustion():
    with pytest.raises(SubstitutionError):
        apply_substitution(parse_latex("x+1=y+2"), FreshNamePolicy(alphabet=("A",)), seed=0)


def test_resolve_inverts_example():
    clauses = [Clause(parse_latex("A(x)"), parse_latex("x+3")), Clause(parse_latex("B(y)"), parse_latex("y-2"))]
    assert render(resolve_substitutions(parse_latex("A(x)=B(y)"), clauses)) == "x+3=y-2"


def test_resolve_identity_without_clauses():
    assert strip_spans(resolve_substitutions(parse_latex("x+1"), [])) == canon("x+1")


def test_resolve_cycle():
    clauses = [Clause(parse_latex("A"), parse_latex("B+1")), Clause(parse_latex("B"), parse_latex("A-1"))]
    with pytest.raises(SubstitutionError, match="cyclic"):
        resolve_substitutions(parse_latex("A=0"), clauses)


def test_resolve_missing_clause_names_head():
    with pytest.raises(SubstitutionError, match="A"):
        resolve_substitutions(parse_latex("A(x)=0"), [], heads={"A"})


@settings(max_examples=200, deadline=None)
@given(formulas, st.integers(0, 2**32))
def test_substitution_round_trip(src, seed):
    tree = parse_latex(src)
    new, clauses, _ = apply_substitution(tree, FreshNamePolicy(), seed=seed)
    back = resolve_substitutions(new, clauses)
    assert strip_spans(normalize(back)) == strip_spans(normalize(tree))


# -- text/math ----------------------------------------------------------------------

def test_tmmt_round_trip():
    src = doc("$F=ma.$")
    text, t1 = apply_tmmt(src, load_lexicon(), direction="math_to_text")
    assert "$" in text.raw and t1
    back, _ = apply_tmmt(text, load_lexicon(), direction="text_to_math")
    (run,) = back.math_runs()
    assert strip_spans(normalize(run.tree)) == strip_spans(normalize(next(src.math_runs()).tree))


def test_tmmt_without_entry_is_identity():
    out, trace = apply_tmmt(doc("$x+y=z^3$"), load_lexicon(), direction="math_to_text")
    assert out.raw == "$x+y=z^3$" and not trace


# -- presentation ---------------------------------------------------------------------

def test_presentation_consistent_rename():
    out, _ = apply_presentation(parse_latex("x+x"), {"x": "y"}, synonyms=False)
    assert render(out) == "y+y"


def test_presentation_rejects_non_bijective():
    with pytest.raises(RenameError):
        apply_presentation(parse_latex("x+y"), {"x": "z", "y": "z"})


def test_presentation_rejects_collision():
    with pytest.raises(RenameError):
        apply_presentation(parse_latex("x+y"), {"x": "y"})


@settings(max_examples=200, deadline=None)
@given(formulas, st.integers(0, 2**32))
def test_presentation_alpha_equivalent_under_rename(src, seed):
    from mathreuse.obfuscate import full_rename
    tree = normalize(parse_latex(src))
    names = sorted(set(identifiers(tree)))
    rename = full_rename(names, random.Random(seed).sample(names, len(names) // 2))
    out, _ = apply_presentation(tree, rename, seed=seed)
    assert alpha_equivalent(normalize(tree), normalize(out)) == {n: rename.get(n, n) for n in names}


def test_present_document_full_rename_changes_every_identifier():
    src = doc("We have $x+y=z$ and $f(x)$.")
    out, trace = present_document(src, full=True, swaps=0, seed=0)
    before = [n for r in src.math_runs() for n in identifiers(r.tree)]
    after = [n for r in out.math_runs() for n in identifiers(r.tree)]
    assert len(before) == len(after) and not set(before) & set(after)


# -- formula manipulation ---------------------------------------------------------------

def test_fm_rules_are_semantics_preserving():
    assert fm_rules() and all(r.semantics_preserving for r in fm_rules())


def test_fm_zero_steps_unchanged():
    out, steps = apply_formula_manipulation(parse_latex("x+3=y-2"), steps=0, seed=0)
    assert strip_spans(out) == canon("x+3=y-2") and steps == []


def test_fm_no_rule_applies():
    out, steps = apply_formula_manipulation(parse_latex("x"), [rule("polar-form")], steps=2, seed=0)
    assert strip_spans(out) == canon("x") and steps == []


def test_fm_rejects_non_preserving_rule():
    bad = RewriteRule.from_record({"name": "bad", "pattern": "a", "replacement": "a+1", "vars": ["a"],
                                   "operator": "ID", "semantics_preserving": False})
    with pytest.raises(ValueError):
        apply_formula_manipulation(parse_latex("x"), [bad])


def test_rule_metavariables_checked():
    with pytest.raises(ValueError):
        RewriteRule.from_record({"name": "bad", "pattern": "a", "replacement": "a+b", "vars": ["a", "b"],
                                 "operator": "FM", "semantics_preserving": True})


def test_move_term_solution_set_agrees():
    # every (x, y) with x+3 = y-2 also satisfies the rewritten x = y-5
    out, _ = apply_formula_manipulation(parse_latex("x+3=y-2"), [rule("move-term")], steps=1, seed=0)
    from mathreuse.obfuscate.treeops import evaluate
    rng = random.Random(0)
    lhs, rhs = out.operands
    for _ in range(20):
        x = rng.uniform(-5, 5)
        env = {"x": x, "y": x + 5}
        assert abs(evaluate(lhs, env) - evaluate(rhs, env)) < 1e-9


def test_move_term_keeps_implicit_product():
    # constant folding must not read a juxtaposed product as an additive chain
    out, _ = apply_formula_manipulation(parse_latex(r"b+3=(-d)\beta+3"), [rule("move-term")], steps=1, seed=0)
    assert render(out) == r"b=(-d)\beta"
    assert numerically_equivalent(normalize(parse_latex(r"b+3=(-d)\beta+3")), out) is True


def test_numerically_equivalent_detects_change():
    assert numerically_equivalent(parse_latex("x+1"), parse_latex("x+2")) is False
    assert numerically_equivalent(parse_latex("a(b+c)"), parse_latex("ab+ac")) is True
    assert numerically_equivalent(parse_latex(r"\int x"), parse_latex(r"\int x")) is None


@settings(max_examples=200, deadline=None)
@given(formulas, st.integers(0, 2**32))
def test_fm_numeric_soundness(src, seed):
    tree = parse_latex(src)
    current = normalize(tree)
    out, steps = apply_formula_manipulation(tree, steps=3, seed=seed)
    for step in steps:
        if step.numeric:
            assert numerically_equivalent(current, step.tree, step.scale, seed=seed) is not False
        current = step.tree


# -- variation of subject ------------------------------------------------------------

def test_vs_empty_map_identity():
    out, trace = apply_variation_of_subject(doc("$x+x=2x$ in Paris"), {}, 0)
    assert out.raw == "$x+x=2x$ in Paris" and not trace


def test_vs_math_leaves():
    out, _ = apply_variation_of_subject(doc("$x+x=2x$"), {"x": "u"}, 0)
    assert out.raw == "$u+u=2u$"


def test_vs_ambiguous_map():
    with pytest.raises(AmbiguityError):
        apply_variation_of_subject(doc("Paris and Rome"), {"Paris": "Rome", "Rome": "Milan"}, 0)


def test_vs_token_count_preserved():
    src = doc("I went to Paris and visited the Eiffel Tower with $x+y$.")
    emap = {"Paris": "Rome", "Eiffel Tower": "Colosseum", "x": "u"}
    out, _ = apply_variation_of_subject(src, emap, 0)
    assert entity_token_count(src, emap) == entity_token_count(out, set(emap.values()))
    assert [type(r) for r in src.runs] == [type(r) for r in out.runs]


# -- recipes and generation ------------------------------------------------------------

def test_parse_recipe_validation():
    assert [s.op.value for s in parse_recipe(["P", {"op": "FM", "params": {"steps": 2}}])] == ["P", "FM"]
    with pytest.raises(RecipeError):
        parse_recipe([])
    with pytest.raises(RecipeError) as info:
        parse_recipe(["P", {"op": "XX"}])
    assert info.value.index == 1
    with pytest.raises(RecipeError):
        parse_recipe([{"op": "P", "params": {"bogus": 1}}])


def test_load_recipes_list_of_recipes(tmp_path):
    path = tmp_path / "r.json"
    path.write_text(json.dumps([["P"], [{"op": "DP"}, "FM"]]))
    assert [len(r) for r in load_recipes(path)] == [1, 2]


def test_derive_seed_stable():
    assert derive_seed(1, "a", 2) == derive_seed(1, "a", 2) != derive_seed(1, "a", 3)


def test_passages():
    d = doc("first para\n\n  second para  \n\n\nthird")
    assert [d.raw[a:b] for a, b in passages(d)] == ["first para", "second para", "third"]


def test_generate_paraphrase_example():
    src = doc(r"The proof reduces to showing that $x\leq 1$.")
    insp, cases = generate_pair(src, [{"op": "P"}], seed=0)
    assert len(cases) == 1 and cases[0].sorted_ops() == ["P"]
    assert cases[0].insp.doc_id == insp.id and cases[0].insp.end == insp.length


def test_generate_two_operators_labels():
    src = doc("$x+3=y-2$")
    insp, cases = generate_pair(src, [{"op": "DP", "params": {"rename": {"x": "u"}, "swaps": 0}},
                                      {"op": "FM", "params": {"rules": ["move-term"]}}], seed=0)
    assert insp.raw == "$u=y-5$"
    assert [c.sorted_ops() for c in cases] == [["DP", "FM"]]


def test_generate_identity_recipe_warns(caplog):
    with caplog.at_level(logging.WARNING):
        _, cases = generate_pair(doc("plain words."), [{"op": "FM"}], seed=0)
    assert cases == [] and "unchanged" in caplog.text


def test_generate_is_deterministic():
    src = doc(r"Hence $a(b+c)=d$ and $x+3=y-2$. The proof reduces to showing that $x\leq 1$.")
    recipe = ["P", "ID", "S", "DP", "FM"]
    assert generate_pair(src, recipe, 5) == generate_pair(src, recipe, 5)


OPS = [op.value for op in ObfuscationOperator]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(formulas, min_size=1, max_size=3), min_size=1, max_size=3),
       st.lists(st.sampled_from(OPS), min_size=1, max_size=4), st.integers(0, 2**32))
def test_generated_cases_survive_replay(paras, recipe, seed):
    raw = "\n\n".join(" and ".join(f"${f}$" for f in p) + "." for p in paras)
    result = generate_pair_traced(doc(raw), recipe, seed)
    replay = ProvenanceReplay(raw)
    for trace in result.traces:
        replay.apply(trace.operator.value, trace.edits)
    assert replay.text() == result.document.raw
    expected = sorted((s, i, tuple(o for o in OPS if o in labels)) for s, i, labels in replay.cases())
    got = sorted(((c.src.start, c.src.end), (c.insp.start, c.insp.end), tuple(c.sorted_ops()))
                 for c in result.cases)
    assert got == expected
