"""Identifier-based reuse detectors and top-k retrieval.

``lcis`` (longest common identifier subsequence) and ``git`` (greedy
identifier tiling) compare the identifier streams of two documents.  The
word n-gram fingerprint detector is a plain text baseline; it stands in for
external plagiarism detectors and is not a reimplementation of any of them.
"""

from __future__ import annotations

import json
import logging
import os
import re
from bisect import bisect_left
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .docmodel import Document, MathRun, Span
from .mathparse import Identifier, Number, identifier_leaves, normalize, walk

__all__ = [
    "IdentItem", "IdentStream", "Tile", "Detection", "DetectorConfig", "Ranking", "RetrievalIndex",
    "ident_stream", "lcis", "git", "tiles_to_detections", "ngram_fingerprint_detect",
    "retrieve_topk", "detect_pair", "doc_score", "worker_count", "DETECTORS",
]

log = logging.getLogger(__name__)

DETECTORS = ("lcis", "git", "fingerprint", "combined")


@dataclass(frozen=True)
class IdentItem:
    name: str
    span: Span


@dataclass(frozen=True)
class IdentStream:
    doc_id: str
    items: tuple[IdentItem, ...]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(it.name for it in self.items)

    def __len__(self) -> int:
        return len(self.items)


@dataclass(frozen=True, order=True)
class Tile:
    src_start: int
    insp_start: int
    length: int

    @property
    def src_range(self) -> range:
        return range(self.src_start, self.src_start + self.length)

    @property
    def insp_range(self) -> range:
        return range(self.insp_start, self.insp_start + self.length)


@dataclass(frozen=True)
class Detection:
    src: Span
    insp: Span
    score: float
    detector: str

    def to_record(self) -> dict:
        return {
            "src_doc": self.src.doc_id, "src_start": self.src.start, "src_end": self.src.end,
            "insp_doc": self.insp.doc_id, "insp_start": self.insp.start, "insp_end": self.insp.end,
            "score": self.score, "detector": self.detector,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Detection":
        return cls(Span(rec["src_doc"], rec["src_start"], rec["src_end"]),
                   Span(rec["insp_doc"], rec["insp_start"], rec["insp_end"]),
                   float(rec.get("score", 0.0)), rec.get("detector", "unknown"))


@dataclass(frozen=True)
class DetectorConfig:
    detector: str = "git"
    min_tile: int = 3
    gap: int = 30
    ngram: int = 4
    threshold: int = 3
    k: int = 10

    def __post_init__(self):
        if self.detector not in DETECTORS:
            raise ValueError(f"detector must be one of {DETECTORS}, got {self.detector!r}")
        if self.min_tile < 1 or self.ngram < 2 or self.threshold < 1 or self.k < 1 or self.gap < 0:
            raise ValueError(f"invalid detector parameters: {self}")

    @classmethod
    def from_dict(cls, data: dict) -> "DetectorConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown detector config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "DetectorConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)


Names = Union[IdentStream, Sequence[str]]


def _names(s: Names) -> Sequence[str]:
    return s.names if isinstance(s, IdentStream) else s


# -- identifier streams ----------------------------------------------------

def ident_stream(doc: Document) -> IdentStream:
    items = []
    for run in doc.math_runs():
        if run.tree is None:
            continue
        for leaf in identifier_leaves(run.tree):
            start, end = leaf.span if leaf.span else (run.content_start, run.content_end)
            items.append(IdentItem(leaf.name, Span(doc.id, start, end)))
    return IdentStream(doc.id, tuple(items))


# -- LCIS ------------------------------------------------------------------

def lcis(a: Names, b: Names) -> tuple[int, list[tuple[int, int]]]:
    """Longest common subsequence of two name sequences.

    Returns the length and the aligned index pairs.  Among optimal
    alignments the one with lexicographically smallest source indices is
    chosen (then smallest inspected indices).
    """
    x, y = _names(a), _names(b)
    n, m = len(x), len(y)
    if not n or not m:
        return 0, []
    # suffix table: L[i][j] = LCS(x[i:], y[j:])
    L = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row, below = L[i], L[i + 1]
        xi = x[i]
        for j in range(m - 1, -1, -1):
            if xi == y[j]:
                row[j] = below[j + 1] + 1
            else:
                row[j] = below[j] if below[j] >= row[j + 1] else row[j + 1]
    positions: dict[str, list[int]] = {}
    for j, name in enumerate(y):
        positions.setdefault(name, []).append(j)
    pairs: list[tuple[int, int]] = []
    i = j = 0
    while i < n and j < m and L[i][j]:
        occ = positions.get(x[i], ())
        k = bisect_left(occ, j)
        if k < len(occ) and L[i + 1][occ[k] + 1] + 1 == L[i][j]:
            pairs.append((i, occ[k]))
            j = occ[k] + 1
        i += 1
    return L[0][0], pairs


# -- GIT -------------------------------------------------------------------

def git(a: Names, b: Names, min_tile: int = 3) -> list[Tile]:
    """Greedy string tiling over identifier names.

    Repeatedly marks the longest common run of unmarked items (ties: smallest
    source start, then smallest inspected start) until no run of length
    ``min_tile`` or more remains.  Tiles are returned sorted by source index.
    """
    if min_tile < 1:
        raise ValueError("min_tile must be >= 1")
    x, y = _names(a), _names(b)
    n, m = len(x), len(y)
    marked_x = [False] * n
    marked_y = [False] * m
    positions: dict[str, list[int]] = {}
    for j, name in enumerate(y):
        positions.setdefault(name, []).append(j)
    tiles: list[Tile] = []
    while True:
        best: Optional[Tile] = None
        for i in range(n):
            if marked_x[i]:
                continue
            xi = x[i]
            for j in positions.get(xi, ()):
                if marked_y[j]:
                    continue
                if i and j and not marked_x[i - 1] and not marked_y[j - 1] and x[i - 1] == y[j - 1]:
                    continue  # not the start of a maximal run
                k = 1
                while (i + k < n and j + k < m and not marked_x[i + k] and not marked_y[j + k]
                       and x[i + k] == y[j + k]):
                    k += 1
                if best is None or k > best.length:
                    best = Tile(i, j, k)
        if best is None or best.length < min_tile:
            break
        tiles.append(best)
        for k in range(best.length):
            marked_x[best.src_start + k] = True
            marked_y[best.insp_start + k] = True
    return sorted(tiles)


def _hull(items: Sequence[IdentItem], rng: range) -> tuple[int, int]:
    return items[rng[0]].span.start, items[rng[-1]].span.end


def tiles_to_detections(tiles: Sequence[Tile], a: IdentStream, b: IdentStream, gap: int = 30,
                        detector: str = "git") -> list[Detection]:
    """Merge tiles whose character gaps on both sides are at most ``gap``.

    ``a`` is the source stream, ``b`` the inspected one.  Each detection
    covers the leaf-span hull of its tiles; its score is the total tile
    length.
    """
    groups: list[list] = []  # [src_lo, src_hi, insp_lo, insp_hi, score]
    for tile in sorted(tiles):
        s_lo, s_hi = _hull(a.items, tile.src_range)
        i_lo, i_hi = _hull(b.items, tile.insp_range)
        if groups:
            g = groups[-1]
            src_gap = max(0, s_lo - g[1], g[0] - s_hi)
            insp_gap = max(0, i_lo - g[3], g[2] - i_hi)
            if src_gap <= gap and insp_gap <= gap:
                g[0], g[1] = min(g[0], s_lo), max(g[1], s_hi)
                g[2], g[3] = min(g[2], i_lo), max(g[3], i_hi)
                g[4] += tile.length
                continue
        groups.append([s_lo, s_hi, i_lo, i_hi, tile.length])
    return [Detection(Span(a.doc_id, g[0], g[1]), Span(b.doc_id, g[2], g[3]), float(g[4]), detector)
            for g in groups]


def _runs_to_tiles(pairs: Sequence[tuple[int, int]], min_len: int) -> list[Tile]:
    tiles, k = [], 0
    while k < len(pairs):
        s, t = pairs[k]
        length = 1
        while k + length < len(pairs) and pairs[k + length] == (s + length, t + length):
            length += 1
        if length >= min_len:
            tiles.append(Tile(s, t, length))
        k += length
    return tiles


# -- n-gram fingerprint baseline -------------------------------------------

_WORD = re.compile(r"\w+", re.UNICODE)


def _fp_tokens(doc: Document) -> list[tuple[str, int, int]]:
    toks: list[tuple[str, int, int]] = []
    for run in doc.runs:
        if isinstance(run, MathRun) and run.tree is not None:
            for leaf in walk(normalize(run.tree)):
                if isinstance(leaf, (Identifier, Number)):
                    lex = leaf.name if isinstance(leaf, Identifier) else leaf.value
                    start, end = leaf.span or (run.content_start, run.content_end)
                    toks.append((lex, start, end))
        else:
            text = run.latex if isinstance(run, MathRun) else run.text
            base = run.content_start if isinstance(run, MathRun) else run.start
            for m in _WORD.finditer(text):
                toks.append((m.group(0).lower(), base + m.start(), base + m.end()))
    toks.sort(key=lambda t: t[1])
    return toks


def _ngrams(toks, n: int) -> list[tuple[str, ...]]:
    words = [t[0] for t in toks]
    return [tuple(words[i:i + n]) for i in range(len(words) - n + 1)]


def ngram_fingerprint_detect(a: Document, b: Document, n: int = 4, threshold: int = 3) -> list[Detection]:
    """Baseline text detector over word n-grams (formulae contribute their
    normalized leaves).  Maximal diagonal runs of at least ``threshold``
    consecutive shared n-grams become detections.  ``a`` is the source."""
    if n < 2:
        raise ValueError("n must be >= 2")
    ta, tb = _fp_tokens(a), _fp_tokens(b)
    ga, gb = _ngrams(ta, n), _ngrams(tb, n)
    where: dict[tuple[str, ...], list[int]] = {}
    for j, g in enumerate(gb):
        where.setdefault(g, []).append(j)
    gb_index = {g: set(js) for g, js in where.items()}
    found = []
    for i, g in enumerate(ga):
        for j in where.get(g, ()):
            if i and j and (j - 1) in gb_index.get(ga[i - 1], ()):
                continue  # continues an earlier diagonal
            length = 1
            while i + length < len(ga) and j + length < len(gb) and ga[i + length] == gb[j + length]:
                length += 1
            if length >= threshold:
                last_a, last_b = i + length - 1 + n - 1, j + length - 1 + n - 1
                found.append([ta[i][1], ta[last_a][2], tb[j][1], tb[last_b][2], length])
    merged = _merge_overlapping(found)
    return [Detection(Span(a.id, f[0], f[1]), Span(b.id, f[2], f[3]), float(f[4]), "fingerprint")
            for f in merged]


def _merge_overlapping(found: list[list]) -> list[list]:
    found.sort()
    out: list[list] = []
    for f in found:
        for g in out:
            if f[0] < g[1] and g[0] < f[1] and f[2] < g[3] and g[2] < f[3]:
                g[0], g[1] = min(g[0], f[0]), max(g[1], f[1])
                g[2], g[3] = min(g[2], f[2]), max(g[3], f[3])
                g[4] = max(g[4], f[4])
                break
        else:
            out.append(list(f))
    return out


# -- document pairs ----------------------------------------------------------

def _dedupe(dets: list[Detection]) -> list[Detection]:
    keep = []
    for k, d in enumerate(dets):
        contained = False
        for m, e in enumerate(dets):
            if k == m:
                continue
            inside = (e.src.start <= d.src.start and d.src.end <= e.src.end
                      and e.insp.start <= d.insp.start and d.insp.end <= e.insp.end)
            if inside and ((e.src, e.insp) != (d.src, d.insp) or m < k):
                contained = True
                break
        if not contained:
            keep.append(d)
    return sorted(keep, key=lambda d: (d.insp.start, d.src.start, d.detector))


def detect_pair(insp: Document, src: Document, config: Optional[DetectorConfig] = None) -> list[Detection]:
    """Run the configured detectors on one (inspected, source) pair."""
    config = config or DetectorConfig()
    dets: list[Detection] = []
    if config.detector in ("git", "combined", "lcis"):
        sa, sb = ident_stream(src), ident_stream(insp)
        if config.detector == "lcis":
            _, pairs = lcis(sa, sb)
            tiles = _runs_to_tiles(pairs, config.min_tile)
            dets += tiles_to_detections(tiles, sa, sb, config.gap, detector="lcis")
        else:
            dets += tiles_to_detections(git(sa, sb, config.min_tile), sa, sb, config.gap)
    if config.detector in ("fingerprint", "combined"):
        dets += ngram_fingerprint_detect(src, insp, config.ngram, config.threshold)
    return _dedupe(dets)


# -- retrieval -------------------------------------------------------------

@dataclass(frozen=True)
class Ranking:
    hits: tuple[tuple[str, float], ...]
    short: bool = False  # fewer than k candidates were available

    def ids(self) -> list[str]:
        return [h[0] for h in self.hits]


def _profile(doc: Document, scorer: str, config: DetectorConfig):
    if scorer == "fingerprint":
        return frozenset(_ngrams(_fp_tokens(doc), config.ngram))
    return ident_stream(doc).names


def _score(q, d, scorer: str, min_tile: int) -> float:
    if scorer == "fingerprint":
        return float(len(q & d))
    if scorer == "lcis":
        return float(lcis(q, d)[0])
    # cheap reject: no shared min_tile-gram means no tile
    grams = {tuple(q[i:i + min_tile]) for i in range(len(q) - min_tile + 1)}
    if not any(tuple(d[i:i + min_tile]) in grams for i in range(len(d) - min_tile + 1)):
        return 0.0
    return float(sum(t.length for t in git(d, q, min_tile)))


def doc_score(query: Document, doc: Document, scorer: str = "git",
              config: Optional[DetectorConfig] = None) -> float:
    config = config or DetectorConfig()
    return _score(_profile(query, scorer, config), _profile(doc, scorer, config), scorer, config.min_tile)


def _score_chunk(args):
    q, chunk, scorer, min_tile = args
    return [(doc_id, _score(q, prof, scorer, min_tile)) for doc_id, prof in chunk]


def worker_count(explicit: Optional[int] = None) -> int:
    if explicit is not None:
        return max(1, explicit)
    env = os.environ.get("MATHREUSE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer MATHREUSE_THREADS=%r", env)
    return 1


class RetrievalIndex:
    """Precomputed per-document profiles for repeated top-k queries."""

    def __init__(self, collection: Iterable[Document], scorer: str = "git",
                 config: Optional[DetectorConfig] = None):
        if scorer not in ("lcis", "git", "fingerprint"):
            raise ValueError(f"unknown scorer {scorer!r}")
        self.scorer = scorer
        self.config = config or DetectorConfig()
        self.profiles = [(d.id, _profile(d, scorer, self.config)) for d in collection]
        if not self.profiles:
            raise ValueError("collection is empty")
        self.ids = {doc_id for doc_id, _ in self.profiles}

    def topk(self, query: Document, k: int = 10, workers: Optional[int] = None,
             executor=None) -> Ranking:
        if k < 1:
            raise ValueError("k must be >= 1")
        if query.id in self.ids:
            raise ValueError(f"query {query.id!r} must not be part of the collection")
        q = _profile(query, self.scorer, self.config)
        nworkers = worker_count(workers)
        if executor is None and nworkers == 1:
            scored = _score_chunk((q, self.profiles, self.scorer, self.config.min_tile))
        else:
            size = max(1, -(-len(self.profiles) // (nworkers * 4)))
            chunks = [(q, self.profiles[s:s + size], self.scorer, self.config.min_tile)
                      for s in range(0, len(self.profiles), size)]
            if executor is not None:
                parts = list(executor.map(_score_chunk, chunks))
            else:
                with ProcessPoolExecutor(max_workers=nworkers) as pool:
                    parts = list(pool.map(_score_chunk, chunks))
            scored = [hit for part in parts for hit in part]
        scored.sort(key=lambda h: (-h[1], h[0]))
        short = k > len(scored)
        if short:
            log.warning("k=%d exceeds collection size %d; returning all", k, len(scored))
        return Ranking(tuple(scored[:k]), short)


def retrieve_topk(query: Document, collection: Sequence[Document], k: int = 10, scorer: str = "git",
                  config: Optional[DetectorConfig] = None, workers: Optional[int] = None) -> Ranking:
    """Rank ``collection`` by document-level similarity to ``query``.

    Scores are raw match sizes: LCIS length, total GIT tile length, or the
    number of shared n-gram fingerprints.  Ties go to the smaller doc id.
    """
    return RetrievalIndex(collection, scorer, config).topk(query, k, workers)
