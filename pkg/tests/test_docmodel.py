import json

import pytest
from hypothesis import given, settings, strategies as st

from mathreuse.docmodel import (
    Corpus, CorpusError, MathRun, ObfuscationOperator, ReuseCase, SegmentError, Span, TextRun,
    corpus_stats, load_corpus, save_corpus, segment_document,
)

OPS = list(ObfuscationOperator)


def case(src, insp, ops, ctype="text", a=0, b=3):
    return ReuseCase(Span(src, a, b), Span(insp, a, b), frozenset(ops), ctype)


# -- segmentation -------------------------------------------------------------

def test_segment_inline_formula():
    doc = segment_document("d", "see $x+1$ now")
    assert [type(r) for r in doc.runs] == [TextRun, MathRun, TextRun]
    assert doc.runs[0].text == "see " and doc.runs[1].latex == "x+1" and doc.runs[2].text == " now"


def test_segment_empty():
    doc = segment_document("d", "")
    assert doc.runs == () and doc.length == 0


def test_segment_adjacent_inline_formulas():
    doc = segment_document("d", "$a$$b$")
    assert [r.latex for r in doc.runs] == ["a", "b"]
    assert all(isinstance(r, MathRun) for r in doc.runs)


@pytest.mark.parametrize("raw, latex", [
    ("$$x=1$$", "x=1"),
    (r"\[x=1\]", "x=1"),
    ("\\begin{equation}x=1\\end{equation}", "x=1"),
])
def test_segment_display_delimiters(raw, latex):
    (run,) = segment_document("d", raw).math_runs()
    assert run.latex == latex and run.start == 0 and run.end == len(raw)


def test_segment_escaped_dollar_is_text():
    doc = segment_document("d", r"costs \$5 and $x$")
    assert [r.latex for r in doc.math_runs()] == ["x"]


def test_segment_unterminated_reports_offset():
    with pytest.raises(SegmentError) as info:
        segment_document("d", "text $x+1")
    assert info.value.offset == 5


def test_segment_tree_spans_are_absolute():
    doc = segment_document("d", "ab $x+y$")
    run = next(doc.math_runs())
    x = run.tree.operands[0]
    assert doc.raw[x.span[0]:x.span[1]] == "x"


def test_parse_failure_is_recorded_on_run():
    doc = segment_document("d", "bad $x+$ formula")
    run = next(doc.math_runs())
    assert run.tree is None and "offset" in run.error


@settings(max_examples=200, deadline=None)
@given(st.lists(st.one_of(st.text("abc ,.", min_size=1, max_size=6),
                          st.sampled_from(["$x$", "$a+b$", "$$y=2$$", r"\[z\]"])), max_size=8))
def test_runs_tile_the_document(parts):
    raw = "".join(parts)
    doc = segment_document("d", raw)
    pos = 0
    for run in doc.runs:
        assert run.start == pos
        pos = run.end
    assert pos == len(raw)


# -- cases and corpus ---------------------------------------------------------

def test_reuse_case_needs_operators():
    with pytest.raises(ValueError):
        case("s", "i", [])


def test_reuse_case_rejects_unknown_type():
    with pytest.raises(ValueError):
        case("s", "i", ["P"], ctype="image")


def _write_corpus(tmp_path, docs, cases, pairs=None):
    with open(tmp_path / "documents.jsonl", "w") as fh:
        for k, v in docs.items():
            fh.write(json.dumps({"id": k, "latex": v}) + "\n")
    with open(tmp_path / "cases.jsonl", "w") as fh:
        for c in cases:
            fh.write(json.dumps(c) + "\n")
    if pairs is not None:
        with open(tmp_path / "pairs.jsonl", "w") as fh:
            for i, s in pairs:
                fh.write(json.dumps({"inspected": i, "source": s}) + "\n")


def _case_record(src="s", insp="i", ops=("P",), ctype="text"):
    return {"src_doc": src, "src_start": 0, "src_end": 4, "insp_doc": insp, "insp_start": 0,
            "insp_end": 4, "ops": list(ops), "case_type": ctype}


def test_load_minimal_corpus(tmp_path):
    _write_corpus(tmp_path, {"s": "some text", "i": "same text"}, [_case_record()])
    corpus = load_corpus(tmp_path)
    assert len(corpus.documents) == 2 and len(corpus.cases) == 1
    assert corpus.pairs == [("i", "s")]


def test_load_rejects_unknown_document(tmp_path):
    _write_corpus(tmp_path, {"s": "some text", "i": "same text"}, [_case_record(src="ghost")])
    with pytest.raises(CorpusError):
        load_corpus(tmp_path)


def test_malformed_record_names_file_line_field(tmp_path):
    rec = _case_record()
    del rec["insp_end"]
    _write_corpus(tmp_path, {"s": "some text", "i": "same text"}, [_case_record(), rec])
    with pytest.raises(CorpusError) as info:
        load_corpus(tmp_path)
    err = info.value
    assert (err.file, err.line, err.field) == ("cases.jsonl", 2, "insp_end")


def test_math_case_type_is_cross_checked(tmp_path):
    _write_corpus(tmp_path, {"s": "some text", "i": "same text"}, [_case_record(ctype="math")])
    with pytest.raises(CorpusError):
        load_corpus(tmp_path)


def test_case_pair_must_be_listed(tmp_path):
    _write_corpus(tmp_path, {"s": "some text", "i": "same text"}, [_case_record()], pairs=[])
    with pytest.raises(CorpusError):
        load_corpus(tmp_path)


def test_stats_all_paraphrase():
    cases = [case("s", "i", ["P"]) for _ in range(4)]
    stats = corpus_stats(cases)
    assert stats["P"].unique == stats["P"].combined == stats.total == 4
    for op in OPS[1:]:
        assert stats[op].combined == stats[op].unique == 0


def test_stats_multi_label():
    stats = corpus_stats([case("s", "i", ["P", "ID"]), case("s", "i", ["P"])])
    assert (stats["P"].combined, stats["P"].unique) == (2, 1)
    assert (stats["ID"].combined, stats["ID"].unique) == (1, 0)
    # presence is not renormalized across operators
    assert stats["P"].presence + stats["ID"].presence == pytest.approx(1.5)


def test_stats_empty():
    stats = corpus_stats([])
    assert stats.total == 0 and all(stats[op].presence == 0 for op in OPS)


op_sets = st.sets(st.sampled_from(OPS), min_size=1)


@settings(max_examples=200, deadline=None)
@given(st.lists(op_sets, max_size=30))
def test_stats_ordering_invariant(sets):
    stats = corpus_stats([case("s", "i", ops) for ops in sets])
    for op in OPS:
        assert stats[op].unique <= stats[op].combined <= stats.total


docs_strategy = st.lists(st.sampled_from(["plain words", "with $x=1$ math", "$a+b$ and $c$", "x"]),
                         min_size=2, max_size=5)


@settings(max_examples=50, deadline=None)
@given(docs_strategy, st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4), op_sets), max_size=6))
def test_corpus_round_trip(tmp_path_factory, texts, raw_cases):
    docs = {f"d{k}": segment_document(f"d{k}", t) for k, t in enumerate(texts)}
    ids = sorted(docs)
    cases = []
    for s, i, ops in raw_cases:
        src, insp = ids[s % len(ids)], ids[i % len(ids)]
        cases.append(ReuseCase(Span(src, 0, 1), Span(insp, 0, 1), frozenset(ops), "text"))
    pairs = list(dict.fromkeys((c.insp.doc_id, c.src.doc_id) for c in cases))
    corpus = Corpus(docs, cases, pairs)
    path = tmp_path_factory.mktemp("corpus")
    save_corpus(corpus, path)
    loaded = load_corpus(path)
    assert loaded.documents == corpus.documents
    assert loaded.cases == corpus.cases and loaded.pairs == corpus.pairs
    save_corpus(loaded, path / "again")
    for name in ("documents.jsonl", "cases.jsonl", "pairs.jsonl"):
        assert (path / name).read_bytes() == (path / "again" / name).read_bytes()
