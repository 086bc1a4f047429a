"""Documents, reuse cases, corpora and their JSONL persistence."""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union

from .mathparse import ExprNode, LatexSyntaxError, parse_latex, transform

__all__ = [
    "Span", "TextRun", "MathRun", "Document", "ObfuscationOperator", "OPERATORS",
    "ReuseCase", "Corpus", "CorpusError", "SegmentError", "OperatorStats", "CorpusStats",
    "segment_document", "load_corpus", "save_corpus", "corpus_stats", "read_cases",
    "write_cases", "read_documents", "write_jsonl", "case_to_record", "case_from_record",
]


class SegmentError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class CorpusError(ValueError):
    """Malformed or inconsistent corpus data; names file, line and field."""

    def __init__(self, message: str, file: Optional[str] = None, line: Optional[int] = None,
                 field: Optional[str] = None):
        where = ":".join(str(x) for x in (file, line) if x is not None)
        detail = f" [{field}]" if field else ""
        super().__init__(f"{where}{detail}: {message}" if where else f"{message}{detail}")
        self.file, self.line, self.field = file, line, field


@dataclass(frozen=True, order=True)
class Span:
    doc_id: str
    start: int
    end: int

    def __len__(self) -> int:
        return self.end - self.start

    def overlaps(self, other: "Span") -> bool:
        return self.doc_id == other.doc_id and self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class TextRun:
    text: str
    start: int
    end: int


@dataclass(frozen=True)
class MathRun:
    """A delimited formula.  ``start``/``end`` include the delimiters;
    ``content_start`` is where ``latex`` begins.  ``tree`` spans are absolute
    document offsets.  A run that failed to parse keeps ``tree=None`` and
    the message in ``error``."""

    latex: str
    start: int
    end: int
    content_start: int
    open: str
    close: str
    tree: Optional[ExprNode] = field(default=None, compare=False)
    error: Optional[str] = None

    @property
    def content_end(self) -> int:
        return self.content_start + len(self.latex)


Run = Union[TextRun, MathRun]


@dataclass(frozen=True)
class Document:
    id: str
    raw: str
    runs: tuple[Run, ...]

    @property
    def length(self) -> int:
        return len(self.raw)

    def math_runs(self) -> Iterator[MathRun]:
        return (r for r in self.runs if isinstance(r, MathRun))

    def text_runs(self) -> Iterator[TextRun]:
        return (r for r in self.runs if isinstance(r, TextRun))


class ObfuscationOperator(str, enum.Enum):
    P = "P"
    ID = "ID"
    S = "S"
    TMMT = "TMMT"
    DP = "DP"
    FM = "FM"
    VS = "VS"

    def __str__(self) -> str:
        return self.value


OPERATORS = tuple(ObfuscationOperator)
CASE_TYPES = ("text", "math", "both")


@dataclass(frozen=True)
class ReuseCase:
    src: Span
    insp: Span
    operators: frozenset
    case_type: str = "both"

    def __post_init__(self):
        ops = frozenset(ObfuscationOperator(o) for o in self.operators)
        if not ops:
            raise ValueError("a reuse case needs at least one obfuscation operator")
        if self.case_type not in CASE_TYPES:
            raise ValueError(f"case_type must be one of {CASE_TYPES}, got {self.case_type!r}")
        object.__setattr__(self, "operators", ops)

    def sorted_ops(self) -> list[str]:
        return [o.value for o in OPERATORS if o in self.operators]


@dataclass
class Corpus:
    documents: dict[str, Document]
    cases: list[ReuseCase] = field(default_factory=list)
    pairs: list[tuple[str, str]] = field(default_factory=list)

    def validate(self) -> None:
        pairs = set(self.pairs)
        for k, case in enumerate(self.cases):
            for side in (case.src, case.insp):
                doc = self.documents.get(side.doc_id)
                if doc is None:
                    raise CorpusError(f"case {k} references unknown document {side.doc_id!r}",
                                      field="doc")
                if not 0 <= side.start < side.end <= doc.length:
                    raise CorpusError(f"case {k} span {side.start}:{side.end} outside "
                                      f"document {side.doc_id!r} of length {doc.length}",
                                      field="span")
            if (case.insp.doc_id, case.src.doc_id) not in pairs:
                raise CorpusError(f"case {k} pair ({case.insp.doc_id}, {case.src.doc_id}) "
                                  "missing from pairs", field="pairs")
            if case.case_type == "math":
                for side in (case.src, case.insp):
                    if not _touches_math(self.documents[side.doc_id], side):
                        raise CorpusError(f"case {k} is typed math but {side.doc_id} "
                                          f"{side.start}:{side.end} has no formula", field="case_type")
        for insp, src in self.pairs:
            for d in (insp, src):
                if d not in self.documents:
                    raise CorpusError(f"pair references unknown document {d!r}", field="pairs")


def _touches_math(doc: Document, span: Span) -> bool:
    return any(r.start < span.end and span.start < r.end for r in doc.math_runs())


# -- segmentation --------------------------------------------------------

_MATH_ENVS = ("equation", "equation*", "align", "align*", "gather", "gather*",
              "multline", "multline*", "eqnarray", "eqnarray*", "displaymath", "math")
_BEGIN = re.compile(r"\\begin\{(" + "|".join(re.escape(e) for e in _MATH_ENVS) + r")\}")


def _find_unescaped(raw: str, needle: str, start: int) -> int:
    i = raw.find(needle, start)
    while i != -1:
        backslashes = 0
        j = i - 1
        while j >= 0 and raw[j] == "\\":
            backslashes += 1
            j -= 1
        if backslashes % 2 == 0:
            return i
        i = raw.find(needle, i + 1)
    return -1


def _shift(tree: ExprNode, delta: int) -> ExprNode:
    return transform(tree, lambda n: n if n.span is None else
                     replace(n, span=(n.span[0] + delta, n.span[1] + delta)))


def _math_run(raw: str, start: int, open_: str, content_start: int, content_end: int,
              close: str) -> MathRun:
    latex = raw[content_start:content_end]
    tree, error = None, None
    try:
        tree = _shift(parse_latex(latex), content_start)
    except LatexSyntaxError as exc:
        error = f"{exc} (document offset {content_start + exc.offset})"
    return MathRun(latex, start, content_end + len(close), content_start, open_, close, tree, error)


def segment_document(doc_id: str, raw: str) -> Document:
    """Split LaTeX source into alternating text and math runs tiling ``raw``.

    Recognized math delimiters: ``$..$``, ``$$..$$``, ``\\(..\\)``,
    ``\\[..\\]`` and the usual display environments.
    """
    runs: list[Run] = []
    i, n, text_start = 0, len(raw), 0

    def flush(upto: int) -> None:
        if upto > text_start:
            runs.append(TextRun(raw[text_start:upto], text_start, upto))

    while i < n:
        c = raw[i]
        if c == "\\" and i + 1 < n:
            nxt = raw[i + 1]
            if nxt in "[(":
                close = "\\]" if nxt == "[" else "\\)"
                end = raw.find(close, i + 2)
                if end == -1:
                    raise SegmentError(f"unterminated \\{nxt}", i)
                flush(i)
                runs.append(_math_run(raw, i, "\\" + nxt, i + 2, end, close))
                i = text_start = end + 2
                continue
            m = _BEGIN.match(raw, i)
            if m:
                close = f"\\end{{{m.group(1)}}}"
                end = raw.find(close, m.end())
                if end == -1:
                    raise SegmentError(f"unterminated {m.group(1)} environment", i)
                flush(i)
                runs.append(_math_run(raw, i, m.group(0), m.end(), end, close))
                i = text_start = end + len(close)
                continue
            i += 2  # escaped character, including \$
            continue
        if c == "$":
            delim = "$$" if raw.startswith("$$", i) else "$"
            end = _find_unescaped(raw, delim, i + len(delim))
            if end == -1:
                raise SegmentError(f"unterminated {delim}", i)
            flush(i)
            runs.append(_math_run(raw, i, delim, i + len(delim), end, delim))
            i = text_start = end + len(delim)
            continue
        i += 1
    flush(n)
    return Document(doc_id, raw, tuple(runs))


# -- persistence ---------------------------------------------------------

def write_jsonl(path: Union[str, Path], records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def _read_jsonl(path: Path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"invalid JSON: {exc.msg}", path.name, lineno) from None
            if not isinstance(rec, dict):
                raise CorpusError("record is not an object", path.name, lineno)
            yield lineno, rec


def _field(rec: dict, name: str, typ, file: str, line: int):
    if name not in rec:
        raise CorpusError("missing field", file, line, name)
    value = rec[name]
    if typ is int and isinstance(value, bool) or not isinstance(value, typ):
        raise CorpusError(f"expected {typ.__name__}, got {type(value).__name__}", file, line, name)
    return value


def case_to_record(case: ReuseCase) -> dict:
    return {
        "src_doc": case.src.doc_id, "src_start": case.src.start, "src_end": case.src.end,
        "insp_doc": case.insp.doc_id, "insp_start": case.insp.start, "insp_end": case.insp.end,
        "ops": case.sorted_ops(), "case_type": case.case_type,
    }


def case_from_record(rec: dict, file: str = "cases.jsonl", line: int = 0) -> ReuseCase:
    src = Span(_field(rec, "src_doc", str, file, line), _field(rec, "src_start", int, file, line),
               _field(rec, "src_end", int, file, line))
    insp = Span(_field(rec, "insp_doc", str, file, line), _field(rec, "insp_start", int, file, line),
                _field(rec, "insp_end", int, file, line))
    ops = _field(rec, "ops", list, file, line)
    try:
        operators = frozenset(ObfuscationOperator(o) for o in ops)
    except ValueError:
        raise CorpusError(f"unknown operator in {ops!r}", file, line, "ops") from None
    case_type = rec.get("case_type", "both")
    try:
        return ReuseCase(src, insp, operators, case_type)
    except ValueError as exc:
        field_name = "ops" if not operators else "case_type"
        raise CorpusError(str(exc), file, line, field_name) from None


def read_cases(path: Union[str, Path]) -> list[ReuseCase]:
    path = Path(path)
    return [case_from_record(rec, path.name, ln) for ln, rec in _read_jsonl(path)]


def write_cases(path: Union[str, Path], cases: Iterable[ReuseCase]) -> None:
    write_jsonl(path, (case_to_record(c) for c in cases))


def read_documents(path: Union[str, Path]) -> dict[str, Document]:
    path = Path(path)
    docs: dict[str, Document] = {}
    for ln, rec in _read_jsonl(path):
        doc_id = _field(rec, "id", str, path.name, ln)
        latex = _field(rec, "latex", str, path.name, ln)
        if doc_id in docs:
            raise CorpusError(f"duplicate document id {doc_id!r}", path.name, ln, "id")
        try:
            docs[doc_id] = segment_document(doc_id, latex)
        except SegmentError as exc:
            raise CorpusError(str(exc), path.name, ln, "latex") from None
    return docs


def load_corpus(path: Union[str, Path]) -> Corpus:
    """Load and validate a corpus directory.

    Expects ``documents.jsonl`` plus optional ``cases.jsonl`` and
    ``pairs.jsonl``; without a pairs file the pairs are taken from the cases.
    """
    root = Path(path)
    if not (root / "documents.jsonl").is_file():
        raise CorpusError("missing documents.jsonl", str(root))
    docs = read_documents(root / "documents.jsonl")
    cases = read_cases(root / "cases.jsonl") if (root / "cases.jsonl").is_file() else []
    if (root / "pairs.jsonl").is_file():
        pairs = [(_field(rec, "inspected", str, "pairs.jsonl", ln),
                  _field(rec, "source", str, "pairs.jsonl", ln))
                 for ln, rec in _read_jsonl(root / "pairs.jsonl")]
    else:
        pairs = list(dict.fromkeys((c.insp.doc_id, c.src.doc_id) for c in cases))
    corpus = Corpus(docs, cases, pairs)
    try:
        corpus.validate()
    except CorpusError as exc:
        raise CorpusError(str(exc), "cases.jsonl", field=exc.field) from None
    return corpus


def save_corpus(corpus: Corpus, path: Union[str, Path]) -> None:
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    write_jsonl(root / "documents.jsonl",
                ({"id": d.id, "latex": d.raw} for d in corpus.documents.values()))
    write_cases(root / "cases.jsonl", corpus.cases)
    write_jsonl(root / "pairs.jsonl",
                ({"inspected": i, "source": s} for i, s in corpus.pairs))


# -- statistics ----------------------------------------------------------

@dataclass(frozen=True)
class OperatorStats:
    combined: int
    unique: int
    presence: float  # combined / total cases, as a fraction


@dataclass(frozen=True)
class CorpusStats:
    total: int
    per_operator: dict

    def __getitem__(self, op) -> OperatorStats:
        return self.per_operator[ObfuscationOperator(op)]


def corpus_stats(corpus: Union[Corpus, Iterable[ReuseCase]]) -> CorpusStats:
    """Per-operator combined count, unique (singleton) count and presence.

    Presence is multi-label: the fractions over all operators may sum past 1.
    """
    cases = corpus.cases if isinstance(corpus, Corpus) else list(corpus)
    total = len(cases)
    per = {}
    for op in OPERATORS:
        combined = sum(1 for c in cases if op in c.operators)
        unique = sum(1 for c in cases if c.operators == {op})
        per[op] = OperatorStats(combined, unique, combined / total if total else 0.0)
    return CorpusStats(total, per)
