"""Token-embedding corpora, word alignments, and per-type vector collections.

Corpus files (``.tec.jsonl``) hold one JSON object per line.  The first line
is a header ``{"dim": d}``; every later line is a sentence::

    {"id": 0, "tokens": ["la", "casa"], "vectors": [[...], [...]]}

Alignment files use the Pharaoh format emitted by common word aligners: one
line per sentence pair, whitespace separated ``a-b`` links, 0-based.
"""
from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from itertools import zip_longest
from typing import Dict, Iterable, Iterator, List, Sequence, Tuple, Union

import numpy as np

from .errors import DimensionMismatch, EmptyCollection, FormatError, IndexOutOfRange, LengthMismatch

__all__ = [
    "SentenceRecord",
    "AlignmentSet",
    "TypeCollection",
    "read_corpus",
    "read_corpus_dim",
    "write_corpus",
    "read_alignments",
    "write_alignments",
    "filter_one_to_one",
    "collect_type_pairs",
    "DEFAULT_CAP",
]

DEFAULT_CAP = 10000

Link = Tuple[int, int]
PathLike = Union[str, "os.PathLike[str]"]

_LINK = re.compile(r"^(\d+)-(\d+)$")


@dataclass
class SentenceRecord:
    id: int
    tokens: List[str]
    vectors: np.ndarray  # (len(tokens), dim)

    def __len__(self):
        return len(self.tokens)


def _open_text(path: PathLike, mode: str = "r"):
    return open(path, mode, encoding="utf-8", newline="\n" if "w" in mode else None)


def _parse_header(line: str, path) -> int:
    try:
        header = json.loads(line)
    except json.JSONDecodeError as exc:
        raise FormatError(f"header is not valid JSON ({exc.msg})", path, 1) from None
    if not isinstance(header, dict) or not isinstance(header.get("dim"), int) or header["dim"] < 1:
        raise FormatError('header must be an object with a positive integer "dim"', path, 1)
    return header["dim"]


def read_corpus_dim(path: PathLike) -> int:
    with _open_text(path) as f:
        first = f.readline()
    if not first.strip():
        raise FormatError("missing header line", path, 1)
    return _parse_header(first, path)


def read_corpus(path: PathLike) -> Iterator[SentenceRecord]:
    """Stream sentences from a token-embedding corpus file in file order."""
    with _open_text(path) as f:
        first = f.readline()
        if not first.strip():
            raise FormatError("missing header line", path, 1)
        dim = _parse_header(first, path)
        for lineno, line in enumerate(f, start=2):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"invalid JSON ({exc.msg})", path, lineno) from None
            if not isinstance(obj, dict):
                raise FormatError("record must be a JSON object", path, lineno)
            try:
                sid, tokens, vectors = obj["id"], obj["tokens"], obj["vectors"]
            except KeyError as exc:
                raise FormatError(f"missing field {exc.args[0]!r}", path, lineno) from None
            if not isinstance(sid, int) or sid < 0:
                raise FormatError('"id" must be a non-negative integer', path, lineno)
            if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
                raise FormatError('"tokens" must be a list of strings', path, lineno)
            if not isinstance(vectors, list) or len(vectors) != len(tokens):
                raise FormatError(
                    f'"vectors" must be a list with one vector per token ({len(tokens)})', path, lineno
                )
            for j, vec in enumerate(vectors):
                if not isinstance(vec, list) or len(vec) != dim:
                    got = len(vec) if isinstance(vec, list) else type(vec).__name__
                    raise DimensionMismatch(
                        f"{path}:{lineno}: vector {j} has length {got}, header dim is {dim}"
                    )
            try:
                arr = np.array(vectors, dtype=np.float64).reshape(len(tokens), dim)
            except (TypeError, ValueError):
                raise FormatError("vector entries must be numbers", path, lineno) from None
            if not np.all(np.isfinite(arr)):
                raise FormatError("vector entries must be finite", path, lineno)
            yield SentenceRecord(sid, tokens, arr)


def write_corpus(path: PathLike, dim: int, sentences: Iterable[SentenceRecord]) -> None:
    """Write a corpus file; floats use ``repr`` so they round-trip exactly."""
    with _open_text(path, "w") as f:
        f.write(json.dumps({"dim": dim}) + "\n")
        for rec in sentences:
            obj = {"id": rec.id, "tokens": list(rec.tokens), "vectors": np.asarray(rec.vectors).tolist()}
            f.write(json.dumps(obj, ensure_ascii=False) + "\n")


class AlignmentSet(Sequence[List[Link]]):
    """Per-sentence alignment links ``(a, b)`` in order of appearance."""

    def __init__(self, sentences: Iterable[Iterable[Link]]):
        self._sentences = [[(int(a), int(b)) for a, b in links] for links in sentences]

    def __len__(self):
        return len(self._sentences)

    def __getitem__(self, i):
        return self._sentences[i]

    def __eq__(self, other):
        if isinstance(other, AlignmentSet):
            return self._sentences == other._sentences
        return NotImplemented

    def __repr__(self):
        return f"AlignmentSet({self._sentences!r})"

    def swapped(self) -> "AlignmentSet":
        """Exchange the roles of the two sides (``a-b`` becomes ``b-a``)."""
        return AlignmentSet([(b, a) for a, b in links] for links in self._sentences)


def parse_alignment_line(line: str, path=None, lineno=None) -> List[Link]:
    links = []
    for tok in line.split():
        m = _LINK.match(tok)
        if m is None:
            raise FormatError(f"bad alignment link {tok!r}, expected 'int-int'", path, lineno)
        links.append((int(m.group(1)), int(m.group(2))))
    return links


def read_alignments(path: PathLike) -> AlignmentSet:
    with _open_text(path) as f:
        return AlignmentSet(
            parse_alignment_line(line, path, lineno) for lineno, line in enumerate(f, start=1)
        )


def write_alignments(path: PathLike, alignments: Iterable[Iterable[Link]]) -> None:
    with _open_text(path, "w") as f:
        for links in alignments:
            f.write(" ".join(f"{a}-{b}" for a, b in links) + "\n")


def filter_one_to_one(links: Sequence[Link]) -> List[Link]:
    """Keep links whose target and source index each occur exactly once."""
    a_count: Dict[int, int] = {}
    b_count: Dict[int, int] = {}
    for a, b in links:
        a_count[a] = a_count.get(a, 0) + 1
        b_count[b] = b_count.get(b, 0) + 1
    return [(a, b) for a, b in links if a_count[a] == 1 and b_count[b] == 1]


class TypeCollection:
    """Paired (target, source) vectors per target type, first ``cap`` kept.

    Storage grows per type in doubling numpy buffers, so memory stays within
    ``types * cap * dim`` floats per side regardless of corpus size.
    ``counts`` records every observation, including those dropped by the cap.
    """

    def __init__(self, dim: int, cap: int = DEFAULT_CAP):
        if cap < 1:
            raise ValueError("cap must be positive")
        self.dim = dim
        self.cap = cap
        self.counts: Dict[str, int] = {}
        self._tgt: Dict[str, np.ndarray] = {}
        self._src: Dict[str, np.ndarray] = {}
        self._size: Dict[str, int] = {}

    def add(self, type_: str, target_vec, source_vec) -> None:
        self.counts[type_] = self.counts.get(type_, 0) + 1
        n = self._size.get(type_, 0)
        if n >= self.cap:
            return
        tgt = self._tgt.get(type_)
        if tgt is None or n == tgt.shape[0]:
            new_len = min(self.cap, max(8, 2 * n))
            new_tgt = np.empty((new_len, self.dim))
            new_src = np.empty((new_len, self.dim))
            if n:
                new_tgt[:n] = tgt[:n]
                new_src[:n] = self._src[type_][:n]
            self._tgt[type_], self._src[type_] = new_tgt, new_src
        self._tgt[type_][n] = target_vec
        self._src[type_][n] = source_vec
        self._size[type_] = n + 1

    def types(self) -> List[str]:
        """Stored types in lexicographic order."""
        return sorted(self._size)

    def pairs(self, type_: str) -> Tuple[np.ndarray, np.ndarray]:
        """``(targets, sources)`` as ``(n, dim)`` arrays, corpus order."""
        n = self._size[type_]
        return self._tgt[type_][:n], self._src[type_][:n]

    def stored(self, type_: str) -> int:
        return self._size.get(type_, 0)

    def total_stored(self) -> int:
        return sum(self._size.values())

    def __len__(self):
        return len(self._size)

    def __contains__(self, type_):
        return type_ in self._size

    def stacked(self) -> Tuple[List[str], np.ndarray, np.ndarray]:
        """All stored pairs stacked in type-lexicographic order."""
        types = self.types()
        if not types:
            empty = np.empty((0, self.dim))
            return types, empty, empty
        tgt = np.concatenate([self.pairs(t)[0] for t in types])
        src = np.concatenate([self.pairs(t)[1] for t in types])
        return types, tgt, src

    def replace_stacked(self, targets: np.ndarray, sources: np.ndarray) -> "TypeCollection":
        """Copy of this collection with vectors replaced by ``stacked()``-ordered rows."""
        out = TypeCollection(self.dim, self.cap)
        out.counts = dict(self.counts)
        offset = 0
        for t in self.types():
            n = self._size[t]
            out._tgt[t] = np.ascontiguousarray(targets[offset:offset + n], dtype=np.float64)
            out._src[t] = np.ascontiguousarray(sources[offset:offset + n], dtype=np.float64)
            out._size[t] = n
            offset += n
        return out


def _records(corpus) -> Iterable[SentenceRecord]:
    if isinstance(corpus, (str, os.PathLike)):
        return read_corpus(corpus)
    return corpus


def collect_type_pairs(
    target,
    source,
    alignments: Iterable[Sequence[Link]],
    cap: int = DEFAULT_CAP,
    lowercase: bool = True,
    dim: int = None,
) -> TypeCollection:
    """Harvest (target vector, source vector) pairs per target type.

    ``target`` and ``source`` are corpus paths or iterables of SentenceRecord;
    links are ``(target index, source index)``.  Only one-to-one links are used.
    """
    coll = None
    if dim is not None:
        coll = TypeCollection(dim, cap)
    missing = object()
    for k, (t_rec, s_rec, links) in enumerate(
        zip_longest(_records(target), _records(source), alignments, fillvalue=missing)
    ):
        if t_rec is missing or s_rec is missing or links is missing:
            raise LengthMismatch(
                f"sentence counts differ: one input ends at sentence {k}"
            )
        if coll is None:
            coll = TypeCollection(t_rec.vectors.shape[1], cap)
        if t_rec.vectors.shape[1] != coll.dim or s_rec.vectors.shape[1] != coll.dim:
            raise DimensionMismatch(
                f"sentence {k}: dims {t_rec.vectors.shape[1]}/{s_rec.vectors.shape[1]}, expected {coll.dim}"
            )
        n_t, n_s = len(t_rec.tokens), len(s_rec.tokens)
        for a, b in links:
            if not (0 <= a < n_t and 0 <= b < n_s):
                raise IndexOutOfRange(
                    f"sentence {k} (id {t_rec.id}): link {a}-{b} outside lengths {n_t}/{n_s}"
                )
        for a, b in filter_one_to_one(links):
            token = t_rec.tokens[a]
            coll.add(token.lower() if lowercase else token, t_rec.vectors[a], s_rec.vectors[b])
    if coll is None:
        raise EmptyCollection("no sentences to collect from")
    return coll
