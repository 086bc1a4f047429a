"""Span-overlap detection metrics and annotation agreement.

Precision, recall, granularity and PlagDet follow the usual plagiarism
detection definitions over character sets; a case or detection is the
pooled set of its source and inspected characters.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Mapping, Optional, Protocol, Sequence

from .docmodel import OPERATORS, ReuseCase, Span

__all__ = [
    "OperatorScores", "EvalReport", "AgreementReport", "case_precision_recall", "granularity",
    "f1_score", "plagdet", "round_half_up", "evaluate", "per_operator_report", "token_jaccard",
    "cohen_kappa", "align_cases", "kappa_items", "agreement_report", "report_csv",
]


class SpanPair(Protocol):
    src: Span
    insp: Span


def _chars(item: SpanPair) -> set[tuple[str, int]]:
    out = {(item.src.doc_id, k) for k in range(item.src.start, item.src.end)}
    out |= {(item.insp.doc_id, k) for k in range(item.insp.start, item.insp.end)}
    return out


def _pair(item: SpanPair) -> tuple[str, str]:
    return item.insp.doc_id, item.src.doc_id


def _check_bounds(items: Iterable[SpanPair], lengths: Optional[Mapping[str, int]]) -> None:
    if lengths is None:
        return
    for item in items:
        for span in (item.src, item.insp):
            size = lengths.get(span.doc_id)
            if size is None or not 0 <= span.start <= span.end <= size:
                raise ValueError(f"span {span.doc_id}:{span.start}-{span.end} lies outside its document")


def _group(items: Iterable[SpanPair]) -> dict[tuple[str, str], list]:
    groups: dict[tuple[str, str], list] = defaultdict(list)
    for item in items:
        groups[_pair(item)].append(item)
    return groups


def _coverage_terms(truth: Sequence[SpanPair], detections: Sequence[SpanPair]):
    """Per-case recall terms and per-detection precision terms, pair by pair."""
    recall_terms, precision_terms = [], []
    truth_by_pair, det_by_pair = _group(truth), _group(detections)
    for key in sorted(set(truth_by_pair) | set(det_by_pair)):
        cases = [_chars(s) for s in truth_by_pair.get(key, ())]
        dets = [_chars(r) for r in det_by_pair.get(key, ())]
        det_union = set().union(*dets) if dets else set()
        case_union = set().union(*cases) if cases else set()
        recall_terms += [len(c & det_union) / len(c) for c in cases if c]
        precision_terms += [len(d & case_union) / len(d) for d in dets if d]
    return recall_terms, precision_terms


def case_precision_recall(truth: Sequence[SpanPair], detections: Sequence[SpanPair],
                          lengths: Optional[Mapping[str, int]] = None) -> tuple[float, float]:
    """Macro-averaged character precision and recall.

    Overlap is only counted between items of the same document pair.  With
    no truth and no detections both are 1; detections without truth have
    precision 0 and recall 1.
    """
    _check_bounds(list(truth) + list(detections), lengths)
    recall_terms, precision_terms = _coverage_terms(truth, detections)
    recall = sum(recall_terms) / len(recall_terms) if recall_terms else 1.0
    if precision_terms:
        precision = sum(precision_terms) / len(precision_terms)
    else:
        precision = 0.0 if recall_terms else 1.0
    return precision, recall


def granularity(truth: Sequence[SpanPair], detections: Sequence[SpanPair]) -> float:
    """Mean number of detections overlapping each detected case; 1 if none is detected."""
    counts = []
    det_by_pair = _group(detections)
    for key, cases in _group(truth).items():
        dets = [_chars(r) for r in det_by_pair.get(key, ())]
        for case in cases:
            chars = _chars(case)
            n = sum(1 for d in dets if d & chars)
            if n:
                counts.append(n)
    return sum(counts) / len(counts) if counts else 1.0


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def plagdet(f1: float, g: float) -> float:
    if g < 1:
        raise ValueError(f"granularity must be >= 1, got {g}")
    return f1 / math.log2(1 + g)


def round_half_up(x: float, places: int = 2) -> float:
    q = Decimal(1).scaleb(-places)
    return float(Decimal(repr(x)).quantize(q, rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class OperatorScores:
    precision: float
    recall: float
    f1: float
    granularity: float
    plagdet: float
    cases: int
    presence: float  # share of all cases carrying the operator, in percent


@dataclass(frozen=True)
class EvalReport:
    precision: float
    recall: float
    f1: float
    granularity: float
    plagdet: float
    per_operator: dict[str, OperatorScores] = field(default_factory=dict)
    cases: int = 0
    detections: int = 0
    detector: str = ""

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _scores(truth, detections, lengths=None) -> tuple[float, float, float, float, float]:
    p, r = case_precision_recall(truth, detections, lengths)
    f = f1_score(p, r)
    g = granularity(truth, detections)
    return p, r, f, g, plagdet(f, g)


def evaluate(truth: Sequence[SpanPair], detections: Sequence[SpanPair],
             lengths: Optional[Mapping[str, int]] = None, detector: str = "") -> EvalReport:
    p, r, f, g, pd = _scores(truth, detections, lengths)
    return EvalReport(p, r, f, g, pd, {}, len(truth), len(detections), detector)


def per_operator_report(truth: Sequence[ReuseCase], detections: Sequence[SpanPair],
                        lengths: Optional[Mapping[str, int]] = None, detector: str = "") -> EvalReport:
    """Overall scores plus, per operator, scores on the cases carrying it.

    A case counts under every operator it carries.  The detections scored
    for an operator are those of document pairs holding such a case.
    """
    overall = evaluate(truth, detections, lengths, detector)
    per: dict[str, OperatorScores] = {}
    for op in OPERATORS:
        sub = [c for c in truth if op in getattr(c, "operators", ())]
        if not sub:
            per[op.value] = OperatorScores(0.0, 0.0, 0.0, 1.0, 0.0, 0, 0.0)
            continue
        pairs = {_pair(c) for c in sub}
        dets = [d for d in detections if _pair(d) in pairs]
        p, r, f, g, pd = _scores(sub, dets)
        per[op.value] = OperatorScores(p, r, f, g, pd, len(sub), 100.0 * len(sub) / len(truth))
    return EvalReport(overall.precision, overall.recall, overall.f1, overall.granularity,
                      overall.plagdet, per, len(truth), len(detections), detector)


def report_csv(reports: Sequence[EvalReport]) -> str:
    """One row per (detector, scope) with rounded F1, G, PD and presence."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["detector", "operator", "presence_pct", "F1", "G", "PD"])
    for rep in reports:
        writer.writerow([rep.detector, "All", "100.00", f"{round_half_up(rep.f1):.2f}",
                         f"{round_half_up(rep.granularity):.2f}", f"{round_half_up(rep.plagdet):.2f}"])
        for op in OPERATORS:
            s = rep.per_operator.get(op.value)
            if s is None:
                continue
            writer.writerow([rep.detector, op.value, f"{round_half_up(s.presence):.2f}",
                             f"{round_half_up(s.f1):.2f}", f"{round_half_up(s.granularity):.2f}",
                             f"{round_half_up(s.plagdet):.2f}"])
    return buf.getvalue()


# -- agreement -------------------------------------------------------------

def token_jaccard(a: Iterable, b: Iterable) -> float:
    a, b = set(a), set(b)
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def cohen_kappa(labels1: Sequence, labels2: Sequence) -> float:
    if len(labels1) != len(labels2):
        raise ValueError(f"label sequences differ in length ({len(labels1)} vs {len(labels2)})")
    n = len(labels1)
    if n == 0:
        return 1.0
    p_o = sum(1 for x, y in zip(labels1, labels2) if x == y) / n
    c1, c2 = Counter(labels1), Counter(labels2)
    p_e = sum(c1[k] * c2[k] for k in c1) / (n * n)
    if p_e == 1:
        return 1.0 if p_o == 1 else 0.0
    return (p_o - p_e) / (1 - p_e)


def align_cases(a: Sequence[ReuseCase], b: Sequence[ReuseCase]) -> list[tuple[Optional[int], Optional[int]]]:
    """Match cases of two annotations by largest character overlap within a pair.

    Returns index pairs; unmatched cases appear with ``None`` on the other side.
    """
    scored = []
    for i, x in enumerate(a):
        cx = _chars(x)
        for j, y in enumerate(b):
            if _pair(x) == _pair(y):
                ov = len(cx & _chars(y))
                if ov:
                    scored.append((-ov, i, j))
    scored.sort()
    used_a, used_b, out = set(), set(), []
    for _, i, j in scored:
        if i not in used_a and j not in used_b:
            used_a.add(i)
            used_b.add(j)
            out.append((i, j))
    out += [(i, None) for i in range(len(a)) if i not in used_a]
    out += [(None, j) for j in range(len(b)) if j not in used_b]
    return sorted(out, key=lambda p: (p[0] if p[0] is not None else len(a), p[1] if p[1] is not None else -1))


def kappa_items(a: Sequence[ReuseCase], b: Sequence[ReuseCase]) -> tuple[list[str], list[str]]:
    """Label sequences for kappa: aligned cases contribute their sorted
    operator labels zipped together, padded with ``none``."""
    l1, l2 = [], []
    for i, j in align_cases(a, b):
        x = a[i].sorted_ops() if i is not None else []
        y = b[j].sorted_ops() if j is not None else []
        width = max(len(x), len(y))
        l1 += x + ["none"] * (width - len(x))
        l2 += y + ["none"] * (width - len(y))
    return l1, l2


@dataclass(frozen=True)
class AgreementReport:
    token_jaccard: float
    case_type_overlap: float
    obfuscation_overlap: float
    kappa: float

    def to_dict(self) -> dict:
        return asdict(self)


def agreement_report(a: Sequence[ReuseCase], b: Sequence[ReuseCase]) -> AgreementReport:
    chars_a = set().union(*(_chars(c) for c in a)) if a else set()
    chars_b = set().union(*(_chars(c) for c in b)) if b else set()
    matched = [(a[i], b[j]) for i, j in align_cases(a, b) if i is not None and j is not None]
    if matched:
        type_overlap = sum(x.case_type == y.case_type for x, y in matched) / len(matched)
        ops_overlap = sum(token_jaccard(x.operators, y.operators) for x, y in matched) / len(matched)
    else:
        type_overlap = ops_overlap = 1.0 if not a and not b else 0.0
    l1, l2 = kappa_items(a, b)
    return AgreementReport(token_jaccard(chars_a, chars_b), type_overlap, ops_overlap, cohen_kappa(l1, l2))
