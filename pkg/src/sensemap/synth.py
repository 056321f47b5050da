"""Synthetic bilingual corpora with a planted orthogonal map.

Every target type has one or more senses; each sense is tied to its own
source type, so polysemous target words align to different source words
depending on sense.  A source occurrence is its clean sense vector plus
noise; the aligned target occurrence is ``A @ clean`` plus a per-sense
offset, a shared anisotropy offset, and independent noise.  Alignments are
the identity ``i-i``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterator, List, Tuple

import numpy as np

from .ingest import SentenceRecord, write_alignments
from .linalg import EmbeddingMatrix, random_orthogonal

__all__ = ["SynthConfig", "GroundTruth", "SynthBundle", "generate_synthetic", "load_ground_truth"]


@dataclass(frozen=True)
class SynthConfig:
    dim: int = 32
    n_types: int = 500
    n_sentences: int = 2000
    sentence_len: int = 10
    # sense_fractions[s] is the share of types with s + 1 senses
    sense_fractions: Tuple[float, ...] = (0.8, 0.2)
    noise_sigma: float = 0.01
    anisotropy_offset_norm: float = 0.0
    source_anisotropy_offset_norm: float = 0.0
    sense_offset_norm: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dim must be at least 2")
        for name in ("n_types", "n_sentences", "sentence_len"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        for name in ("noise_sigma", "anisotropy_offset_norm", "source_anisotropy_offset_norm", "sense_offset_norm"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        fr = tuple(float(f) for f in self.sense_fractions)
        if not fr or any(f < 0 for f in fr) or abs(sum(fr) - 1.0) > 1e-9:
            raise ValueError("sense_fractions must be non-negative and sum to 1")
        object.__setattr__(self, "sense_fractions", fr)


@dataclass
class GroundTruth:
    A: np.ndarray  # source -> target
    type_truth: Dict[str, str]  # "tgt@sense" -> source type
    target_senses: Dict[str, np.ndarray]
    source_senses: Dict[str, np.ndarray]

    def target_matrix(self):
        labels = sorted(self.target_senses)
        return EmbeddingMatrix.from_rows([self.target_senses[l] for l in labels], labels)

    def source_matrix(self):
        labels = sorted(self.source_senses)
        return EmbeddingMatrix.from_rows([self.source_senses[l] for l in labels], labels)

    def to_json(self) -> str:
        obj = {
            "a": self.A.tolist(),
            "type_truth": self.type_truth,
            "sense_vectors": {
                "target": {k: v.tolist() for k, v in self.target_senses.items()},
                "source": {k: v.tolist() for k, v in self.source_senses.items()},
            },
        }
        return json.dumps(obj) + "\n"


def load_ground_truth(path) -> GroundTruth:
    with open(path, encoding="utf-8") as f:
        obj = json.load(f)
    sv = obj["sense_vectors"]
    return GroundTruth(
        np.array(obj["a"], dtype=np.float64),
        dict(obj["type_truth"]),
        {k: np.array(v, dtype=np.float64) for k, v in sv["target"].items()},
        {k: np.array(v, dtype=np.float64) for k, v in sv["source"].items()},
    )


@dataclass
class SynthBundle:
    target: Path
    source: Path
    alignments: Path
    truth: Path


def _unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def _sense_counts(cfg: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    counts = np.floor(np.array(cfg.sense_fractions) * cfg.n_types + 0.5).astype(int)
    counts[0] += cfg.n_types - counts.sum()  # rounding leftovers go to single-sense types
    senses = np.repeat(np.arange(1, len(counts) + 1), counts)
    return rng.permutation(senses)


def _plant(cfg: SynthConfig):
    rng = np.random.default_rng(cfg.seed)
    d = cfg.dim
    A = random_orthogonal(d, rng)
    n_senses = _sense_counts(cfg, rng)
    tgt_aniso = cfg.anisotropy_offset_norm * _unit(rng, d)
    src_aniso = cfg.source_anisotropy_offset_norm * _unit(rng, d)

    tgt_names = [f"tgt{i:05d}" for i in range(cfg.n_types)]
    src_names: List[List[str]] = []
    src_clean: List[np.ndarray] = []  # per type: (senses, d)
    tgt_clean: List[np.ndarray] = []
    truth = GroundTruth(A, {}, {}, {})
    j = 0
    for i in range(cfg.n_types):
        names, s_vecs, t_vecs = [], [], []
        for s in range(n_senses[i]):
            name = f"src{j:05d}"
            j += 1
            sv = _unit(rng, d)
            tv = A @ sv + cfg.sense_offset_norm * _unit(rng, d) + tgt_aniso
            names.append(name)
            s_vecs.append(sv)
            t_vecs.append(tv)
            label = f"{tgt_names[i]}@{s}"
            truth.type_truth[label] = name
            truth.target_senses[label] = tv
            truth.source_senses[name] = sv
        src_names.append(names)
        src_clean.append(np.array(s_vecs))
        tgt_clean.append(np.array(t_vecs))
    return rng, truth, n_senses, tgt_names, src_names, src_clean, tgt_clean, src_aniso


def generate_synthetic(cfg: SynthConfig, out_dir, prefix: str = "") -> SynthBundle:
    """Write ``target.tec.jsonl``, ``source.tec.jsonl``, ``align.txt`` and ``truth.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng, truth, n_senses, tgt_names, src_names, src_clean, tgt_clean, src_aniso = _plant(cfg)
    d, L = cfg.dim, cfg.sentence_len

    def sentences() -> Iterator[Tuple[SentenceRecord, SentenceRecord]]:
        for sid in range(cfg.n_sentences):
            types = rng.integers(cfg.n_types, size=L)
            u = rng.random(L)
            noise = rng.standard_normal((2, L, d)) * cfg.noise_sigma
            senses = (u * n_senses[types]).astype(int)
            s_vecs = np.stack([src_clean[t][s] for t, s in zip(types, senses)]) + src_aniso + noise[0]
            t_vecs = np.stack([tgt_clean[t][s] for t, s in zip(types, senses)]) + noise[1]
            yield (
                SentenceRecord(sid, [tgt_names[t] for t in types], t_vecs),
                SentenceRecord(sid, [src_names[t][s] for t, s in zip(types, senses)], s_vecs),
            )

    bundle = SynthBundle(
        out / f"{prefix}target.tec.jsonl",
        out / f"{prefix}source.tec.jsonl",
        out / f"{prefix}align.txt",
        out / f"{prefix}truth.json",
    )
    # both corpora are written in one pass so the generator stays streaming
    with _PairWriter(bundle.target, bundle.source, d) as writer:
        for t_rec, s_rec in sentences():
            writer.write(t_rec, s_rec)
    write_alignments(bundle.alignments, ([(i, i) for i in range(L)] for _ in range(cfg.n_sentences)))
    with open(bundle.truth, "w", encoding="utf-8", newline="\n") as f:
        f.write(truth.to_json())
    return bundle


class _PairWriter:
    def __init__(self, target_path, source_path, dim):
        self.paths = (target_path, source_path)
        self.dim = dim

    def __enter__(self):
        self.files = [open(p, "w", encoding="utf-8", newline="\n") for p in self.paths]
        for f in self.files:
            f.write(json.dumps({"dim": self.dim}) + "\n")
        return self

    def write(self, *records: SentenceRecord):
        for f, rec in zip(self.files, records):
            obj = {"id": rec.id, "tokens": rec.tokens, "vectors": rec.vectors.tolist()}
            f.write(json.dumps(obj) + "\n")

    def __exit__(self, *exc):
        for f in self.files:
            f.close()
