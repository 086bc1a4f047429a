"""Command-line front end: parse, generate, detect, eval and agree.

Exit codes: 0 success, 1 usage or input error, 2 data or parse error.
Every pipeline output directory receives one ``manifest.json`` whose digest
covers all other files written by the command.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

from . import FORMAT_VERSION, __version__
from .detect import Detection, DetectorConfig, RetrievalIndex, detect_pair, worker_count
from .docmodel import (
    CorpusError, SegmentError, case_to_record, read_cases, read_documents,
    segment_document, write_jsonl,
)
from .evalmetrics import agreement_report, per_operator_report, report_csv
from .mathparse import ExprNode, LatexSyntaxError, tokenize_latex
from .obfuscate import RecipeError, derive_seed, generate_pair, load_recipes

log = logging.getLogger("mathreuse")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- manifest -------------------------------------------------------------

def file_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@dataclass
class RunManifest:
    command: str
    config: dict
    inputs: dict[str, str]          # path -> sha256 of the input file
    seed: Optional[int]
    version: str = __version__
    format_version: int = FORMAT_VERSION
    outputs: dict[str, str] = field(default_factory=dict)
    digest: str = ""

    def seal(self, out_dir: Path) -> "RunManifest":
        """Hash every output file (sorted by relative path) except the manifest."""
        files = sorted(p for p in out_dir.rglob("*") if p.is_file() and p.name != "manifest.json")
        self.outputs = {p.relative_to(out_dir).as_posix(): file_digest(p) for p in files}
        h = hashlib.sha256()
        for name, digest in self.outputs.items():
            h.update(f"{name}\0{digest}\n".encode("utf-8"))
        self.digest = h.hexdigest()
        return self

    def write(self, out_dir: Path) -> None:
        text = json.dumps(asdict(self), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
        (out_dir / "manifest.json").write_text(text, encoding="utf-8", newline="\n")


def _input_digests(paths: Sequence[Path]) -> dict[str, str]:
    return {str(p): file_digest(p) for p in paths if p.is_file()}


def _documents_file(path: str) -> Path:
    p = Path(path)
    if p.is_dir():
        p = p / "documents.jsonl"
    if not p.is_file():
        raise UsageError(f"no documents found at {path}")
    return p


def _out_dir(path: str) -> Path:
    out = Path(path)
    if out.exists() and not out.is_dir():
        raise UsageError(f"output path {path} is not a directory")
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- parse ----------------------------------------------------------------

def _node_json(node: ExprNode) -> dict:
    out: dict = {"type": type(node).__name__}
    if node.span is not None:
        out["span"] = list(node.span)
    for f in fields(node):
        if f.name == "span":
            continue
        value = getattr(node, f.name)
        if isinstance(value, ExprNode):
            value = _node_json(value)
        elif isinstance(value, tuple):
            value = [_node_json(v) if isinstance(v, ExprNode) else v for v in value]
        out[f.name] = value
    return out


def _tree_lines(node: ExprNode, depth: int = 0) -> list[str]:
    label = type(node).__name__
    attrs = []
    children = []
    for f in fields(node):
        if f.name == "span":
            continue
        value = getattr(node, f.name)
        if isinstance(value, ExprNode):
            children.append(value)
        elif isinstance(value, tuple) and value and all(isinstance(v, ExprNode) for v in value):
            children.extend(value)
        elif value not in (None, (), ""):
            attrs.append(f"{f.name}={value!r}")
    lines = ["  " * depth + label + (" " + " ".join(attrs) if attrs else "")]
    for child in children:
        lines += _tree_lines(child, depth + 1)
    return lines


def cmd_parse(args) -> int:
    path = Path(args.file)
    if not path.is_file():
        raise UsageError(f"no such file: {path}")
    raw = path.read_text(encoding="utf-8")
    try:
        doc = segment_document(path.stem, raw)
    except SegmentError as exc:
        raise DataError(f"{path}: {exc}") from None
    failed = False
    records = []
    for k, run in enumerate(doc.math_runs()):
        try:
            tokens = [(t.kind, t.text, t.offset) for t in tokenize_latex(run.latex)]
        except LatexSyntaxError:
            tokens = []
        if run.error:
            failed = True
            print(f"{path}: math run {k}: {run.error}", file=sys.stderr)
        if args.json:
            records.append({"run": k, "start": run.start, "end": run.end, "latex": run.latex,
                            "tokens": [list(t) for t in tokens],
                            "tree": _node_json(run.tree) if run.tree is not None else None,
                            "error": run.error})
        elif run.tree is not None:
            print(f"run {k} [{run.start}:{run.end}] {run.latex}")
            print("tokens: " + " ".join(t[1] for t in tokens))
            print("\n".join(_tree_lines(run.tree)))
    if args.json:
        print(json.dumps(records, indent=2, ensure_ascii=False))
    return EXIT_DATA if failed else EXIT_OK


# -- generate ---------------------------------------------------------------

def _generate_job(job):
    src, recipe, seed, insp_id, r = job
    try:
        return generate_pair(src, recipe, seed, insp_id)
    except RecipeError as exc:
        raise RecipeError(f"recipe {r}: {exc}", r) from None


def cmd_generate(args) -> int:
    docs_path = _documents_file(args.corpus)
    recipes_path = Path(args.recipes)
    if not recipes_path.is_file():
        raise UsageError(f"no such recipe file: {recipes_path}")
    try:
        sources = read_documents(docs_path)
    except CorpusError as exc:
        raise DataError(str(exc)) from None
    try:
        recipes = load_recipes(recipes_path)
    except RecipeError as exc:
        raise UsageError(f"invalid recipe: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{recipes_path}: invalid JSON: {exc.msg}") from None
    jobs = []
    for doc_id in sorted(sources):
        for r, recipe in enumerate(recipes):
            insp_id = f"{doc_id}.insp" if len(recipes) == 1 else f"{doc_id}.insp{r}"
            if insp_id in sources:
                raise UsageError(f"generated id {insp_id!r} collides with a corpus document")
            jobs.append((sources[doc_id], recipe, derive_seed(args.seed, doc_id, r), insp_id, r))
    nworkers = worker_count(args.workers)
    try:
        if nworkers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=nworkers) as pool:
                results = list(pool.map(_generate_job, jobs, chunksize=max(1, len(jobs) // (4 * nworkers))))
        else:
            results = [_generate_job(j) for j in jobs]
    except RecipeError as exc:
        raise UsageError(f"invalid recipe: {exc}") from None
    out = _out_dir(args.out)
    documents = [{"id": d.id, "latex": d.raw} for d in (sources[k] for k in sorted(sources))]
    documents += [{"id": insp.id, "latex": insp.raw} for insp, _ in results]
    write_jsonl(out / "documents.jsonl", documents)
    (out / "inspected").mkdir(exist_ok=True)
    write_jsonl(out / "inspected" / "documents.jsonl", documents[len(sources):])
    write_jsonl(out / "cases.jsonl", (case_to_record(c) for _, cases in results for c in cases))
    write_jsonl(out / "pairs.jsonl", ({"inspected": job[3], "source": job[0].id} for job in jobs))
    manifest = RunManifest("generate", {"recipes": json.loads(recipes_path.read_text(encoding="utf-8"))},
                           _input_digests([docs_path, recipes_path]), args.seed)
    manifest.seal(out).write(out)
    print(f"generated {len(results)} pairs, "
          f"{sum(len(c) for _, c in results)} cases -> {out} (digest {manifest.digest[:12]})")
    return EXIT_OK


# -- detect -----------------------------------------------------------------

def _safe_name(doc_id: str) -> str:
    return "".join(c if c.isalnum() or c in "._-" else "_" for c in doc_id)


def cmd_detect(args) -> int:
    q_path, c_path = _documents_file(args.queries), _documents_file(args.collection)
    inputs = [q_path, c_path]
    try:
        config = DetectorConfig()
        if args.config:
            config = DetectorConfig.load(args.config)
            inputs.append(Path(args.config))
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(f"invalid detector config: {exc}") from None
    try:
        queries = read_documents(q_path)
        collection = read_documents(c_path)
    except CorpusError as exc:
        raise DataError(str(exc)) from None
    if args.query_ids:
        wanted = [q.strip() for q in args.query_ids.split(",") if q.strip()]
        missing = [q for q in wanted if q not in queries]
        if missing:
            raise UsageError(f"unknown query ids: {missing}")
        queries = {q: queries[q] for q in wanted}
    # inspected documents are never part of the searched collection
    pool_docs = [collection[k] for k in sorted(collection) if k not in queries]
    if not pool_docs:
        raise UsageError("collection is empty (after removing the query documents)")
    scorer = "git" if config.detector == "combined" else config.detector
    index = RetrievalIndex(pool_docs, scorer, config)
    by_id = {d.id: d for d in pool_docs}
    out = _out_dir(args.out)
    det_dir = out / "detections"
    det_dir.mkdir(exist_ok=True)
    nworkers = worker_count(args.workers)
    rankings = []
    total = 0
    executor = ProcessPoolExecutor(max_workers=nworkers) if nworkers > 1 else None
    try:
        for qid in sorted(queries):
            ranking = index.topk(queries[qid], config.k, workers=nworkers, executor=executor)
            rankings.append({"query": qid, "hits": [[d, s] for d, s in ranking.hits], "short": ranking.short})
            dets: list[Detection] = []
            for doc_id, score in ranking.hits:
                if score > 0:
                    dets += detect_pair(queries[qid], by_id[doc_id], config)
            total += len(dets)
            write_jsonl(det_dir / f"{_safe_name(qid)}.jsonl", (d.to_record() for d in dets))
    finally:
        if executor is not None:
            executor.shutdown()
    write_jsonl(out / "rankings.jsonl", rankings)
    manifest = RunManifest("detect", config.to_dict(), _input_digests(inputs), None)
    manifest.seal(out).write(out)
    print(f"{len(queries)} queries, {total} detections -> {out} (digest {manifest.digest[:12]})")
    return EXIT_OK


# -- eval -------------------------------------------------------------------

def read_detections(path: str) -> list[Detection]:
    p = Path(path)
    if p.is_dir():
        sub = p / "detections"
        files = sorted((sub if sub.is_dir() else p).glob("*.jsonl"))
    elif p.is_file():
        files = [p]
    else:
        raise UsageError(f"no detections found at {path}")
    dets = []
    for f in files:
        for lineno, line in enumerate(f.read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                dets.append(Detection.from_record(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise DataError(f"{f.name}:{lineno}: malformed detection ({exc})") from None
    return dets


def cmd_eval(args) -> int:
    try:
        truth = read_cases(args.truth)
    except FileNotFoundError:
        raise UsageError(f"no such truth file: {args.truth}") from None
    except CorpusError as exc:
        raise DataError(str(exc)) from None
    dets = read_detections(args.detections)
    truth_docs = {c.insp.doc_id for c in truth}
    stray = sorted({d.insp.doc_id for d in dets} - truth_docs)
    if stray:
        raise UsageError(f"detections for documents absent from the truth: {stray[:5]}")
    out = Path(args.out)
    if out.suffix not in (".json", ".csv"):
        raise UsageError("--out must end in .json or .csv")
    detectors = sorted({d.detector for d in dets}) or ["none"]
    reports = [per_operator_report(truth, [d for d in dets if d.detector == name], detector=name)
               for name in detectors]
    out.parent.mkdir(parents=True, exist_ok=True)
    if out.suffix == ".csv":
        out.write_text(report_csv(reports), encoding="utf-8", newline="\n")
    else:
        data = {"format_version": FORMAT_VERSION, "reports": [r.to_dict() for r in reports]}
        out.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n")
    for r in reports:
        print(f"{r.detector}: P={r.precision:.4f} R={r.recall:.4f} F1={r.f1:.4f} "
              f"G={r.granularity:.4f} PD={r.plagdet:.4f}")
    return EXIT_OK


# -- agree ------------------------------------------------------------------

def cmd_agree(args) -> int:
    try:
        a, b = read_cases(args.a), read_cases(args.b)
    except FileNotFoundError as exc:
        raise UsageError(f"no such file: {exc.filename}") from None
    except CorpusError as exc:
        raise DataError(str(exc)) from None
    docs_a = {d for c in a for d in (c.src.doc_id, c.insp.doc_id)}
    docs_b = {d for c in b for d in (c.src.doc_id, c.insp.doc_id)}
    if docs_a != docs_b:
        raise UsageError(f"annotations cover different documents: {sorted(docs_a ^ docs_b)[:5]}")
    print(json.dumps(agreement_report(a, b).to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mathreuse", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version",
                        version=f"mathreuse {__version__} (format {FORMAT_VERSION})")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("parse", help="show tokens and expression trees of a LaTeX file")
    p.add_argument("file")
    p.add_argument("--json", action="store_true", help="structured JSON output")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("generate", help="apply obfuscation recipes to a corpus")
    p.add_argument("--corpus", required=True, help="corpus directory or documents.jsonl")
    p.add_argument("--recipes", required=True, help="JSON recipe (list of steps) or list of recipes")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=None, help="worker processes (default MATHREUSE_THREADS or 1)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("detect", help="retrieve top-k candidates and detect reuse per query")
    p.add_argument("--queries", required=True, help="directory or documents.jsonl of inspected documents")
    p.add_argument("--collection", required=True, help="directory or documents.jsonl to search")
    p.add_argument("--config", default=None, help="detector config JSON")
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=None, help="worker processes (default MATHREUSE_THREADS or 1)")
    p.add_argument("--query-ids", default=None, help="comma-separated subset of query ids")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="score detections against ground truth")
    p.add_argument("--truth", required=True, help="cases.jsonl")
    p.add_argument("--detections", required=True, help="detect output directory or a .jsonl file")
    p.add_argument("--out", required=True, help="report path ending in .json or .csv")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("agree", help="agreement between two annotations")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(func=cmd_agree)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
