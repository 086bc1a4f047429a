"""One worked example per obfuscation operator: source passage in,
expected inspected passage out."""

from mathreuse.docmodel import segment_document
from mathreuse.mathparse import normalize, parse_latex, render, strip_spans, tokenize_latex
from mathreuse.obfuscate import (
    FreshNamePolicy, apply_formula_manipulation, apply_insert_delete, apply_paraphrase,
    apply_presentation, apply_substitution, apply_tmmt, apply_variation_of_subject, load_lexicon,
    load_rules, substitute_document,
)


def squash(s):
    return "".join(s.split())


def math_tokens(latex):
    """Token texts with grouping braces and a closing full stop dropped."""
    toks = [t.text for t in tokenize_latex(latex) if t.text not in ("{", "}")]
    if toks and toks[-1] == ".":
        toks.pop()
    return toks


def rule(name):
    return next(r for r in load_rules() if r.name == name)


def test_paraphrase_golden():
    src = segment_document("src", r"The proof reduces to showing that $x\leq 1$.")
    out, trace = apply_paraphrase(src, load_lexicon(), seed=0)
    assert squash(out.raw) == squash(r"It is sufficient to prove that $1\geq x$.")
    assert trace.edits


def test_insert_delete_golden():
    src = segment_document("src", r"\(\langle x+y,x+y \rangle \leq \lVert x \rVert^2 + 2 \lvert \langle x,y "
                                  r"\rangle \rvert + \lVert y \rVert^2\)")
    expected = (r"\langle x+y,x+y \rangle \ {=\lVert x \rVert^2 + \langle x,y \rangle + \langle y,x \rangle "
                r"+ \lVert y \rVert^2} \\ \leq \lVert x \rVert^2 + 2\lvert\langle x,y \rangle\rvert + "
                r"\lVert y \rVert^2.")
    out, trace = apply_insert_delete(src, "insert", library=[rule("inner-product-expand")], seed=0,
                                     site="chain")
    (run,) = out.math_runs()
    assert math_tokens(run.latex) == math_tokens(expected)
    assert len(trace.edits) == 1


def test_substitution_golden():
    src = segment_document("src", "$x+3=y-2$")
    out, _ = substitute_document(src, seed=0)
    assert squash(out.raw) == squash("$A(x)=B(y),$ where $A(x)=x+3$ and $B(y)=y-2$.")


def test_substitution_clauses_golden():
    new, clauses, _ = apply_substitution(parse_latex("x+3=y-2"), FreshNamePolicy(), seed=0)
    assert render(new) == "A(x)=B(y)"
    assert [c.latex() for c in clauses] == ["A(x)=x+3", "B(y)=y-2"]


def test_tmmt_golden():
    src = segment_document("src", "The force $F$ acting on a body equals the product of its mass $m$ "
                                  "and acceleration $a$.")
    out, _ = apply_tmmt(src, load_lexicon(), direction="text_to_math")
    assert squash(out.raw) == squash("$F=ma.$")


def test_presentation_golden():
    out, _ = apply_presentation(parse_latex("f(x)"), {"f": "g"}, synonyms=False)
    assert render(out) == "g(x)"


def test_presentation_synonym_golden():
    out, _ = apply_presentation(parse_latex("1"), {}, seed=0)
    assert render(out) == "1.0"


def test_manipulation_polar_golden():
    out, steps = apply_formula_manipulation(parse_latex("z = a+bi"), [rule("polar-form")], steps=1, seed=0)
    assert strip_spans(out) == strip_spans(normalize(parse_latex(r"z=re^{i\phi}")))
    assert [s.rule for s in steps] == ["polar-form"]


def test_manipulation_move_term_golden():
    out, _ = apply_formula_manipulation(parse_latex("x+3=y-2"), [rule("move-term")], steps=1, seed=0)
    assert render(out) == "x=y-5"


def test_variation_of_subject_golden():
    src = segment_document("src", "I went to [Paris] for a few days and visited the (Eiffel Tower).")
    out, _ = apply_variation_of_subject(src, load_lexicon().entity_map, seed=0)
    assert squash(out.raw) == squash("I went to [Rome] for a few days and visited the (Colosseum).")
