"""End-to-end training of a target-to-source orthogonal map, and its use.

Training runs in this order:

1. harvest (target, source) vector pairs per target type through one-to-one
   alignment links;
2. iterative normalization fitted separately on all stored target vectors and
   all stored source vectors (or plain unit normalization with IN disabled);
3. per-type word or sense anchors;
4. column-aligned anchor matrices, unit-normalized;
5. orthogonal Procrustes.
"""
from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import dataclass, field, replace
from typing import Dict, List

import numpy as np

from .clustering import AnchorPairSet, ClusteringConfig, derive_sense_anchors
from .errors import (
    DimensionMismatch,
    EmptyCollection,
    FormatError,
    InsufficientAnchors,
    VersionMismatch,
)
from .ingest import DEFAULT_CAP, AlignmentSet, TypeCollection, collect_type_pairs, read_alignments
from .isotropy import DEFAULT_IN_ITERATIONS, INTransform, apply_in, fit_iterative_normalization
from .linalg import (
    EmbeddingMatrix,
    OrthogonalMap,
    apply_map,
    solve_procrustes,
    unit_normalize_columns,
)

__all__ = [
    "ARTIFACT_VERSION",
    "PipelineConfig",
    "MappingArtifact",
    "TrainingResult",
    "build_anchor_matrices",
    "normalize_collection",
    "fit_mapping",
    "train_mapping",
    "transfer_vector",
    "transfer_matrix",
    "collect",
    "save_artifact",
    "load_artifact",
    "artifact_to_json",
    "write_word2vec",
    "read_word2vec",
]

ARTIFACT_VERSION = "1"


@dataclass(frozen=True)
class PipelineConfig:
    cap: int = DEFAULT_CAP
    min_count: int = 100
    clustering: ClusteringConfig = ClusteringConfig()
    in_iterations: int = DEFAULT_IN_ITERATIONS
    use_in: bool = True
    lowercase: bool = True
    level: str = "sense"
    seed: int = 42
    target_side: str = "left"

    def __post_init__(self):
        for name in ("cap", "min_count", "in_iterations"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.level not in ("word", "sense"):
            raise ValueError(f"level must be 'word' or 'sense', got {self.level!r}")
        if self.target_side not in ("left", "right"):
            raise ValueError(f"target_side must be 'left' or 'right', got {self.target_side!r}")

    def effective_clustering(self) -> ClusteringConfig:
        return replace(self.clustering, min_count=self.min_count, seed=self.seed)

    def settings(self) -> Dict[str, object]:
        c = self.effective_clustering()
        return {
            "cap": self.cap,
            "min_count": self.min_count,
            "level": self.level,
            "use_in": self.use_in,
            "in_iterations": self.in_iterations,
            "lowercase": self.lowercase,
            "target_side": self.target_side,
            "k_min": c.k_min,
            "k_max": c.k_max,
            "max_iters": c.max_iters,
            "rel_tol": c.rel_tol,
            "min_cluster_size": c.min_cluster_size,
        }


@dataclass(eq=False)
class MappingArtifact:
    dim: int
    level: str
    W: np.ndarray  # (dim, dim), y ~ W @ x maps target to source
    target_in: INTransform
    source_in: INTransform
    anchor_count: int
    residual: float
    settings: Dict[str, object] = field(default_factory=dict)
    seeds: Dict[str, int] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    version: str = ARTIFACT_VERSION

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=np.float64)
        if self.W.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"W has shape {self.W.shape}, expected ({self.dim}, {self.dim})")
        if self.target_in.dim != self.dim or self.source_in.dim != self.dim:
            raise DimensionMismatch("IN transforms must match the artifact dimension")

    @property
    def map(self) -> OrthogonalMap:
        return OrthogonalMap(self.W, self.residual)

    @property
    def use_in(self) -> bool:
        return bool(self.settings.get("use_in", True))


@dataclass
class TrainingResult:
    artifact: MappingArtifact
    anchors: AnchorPairSet
    X_s: EmbeddingMatrix
    Y_s: EmbeddingMatrix
    collection: TypeCollection


def build_anchor_matrices(anchors: AnchorPairSet):
    """Column-aligned, unit-normalized ``(X_s, Y_s)`` labelled ``type@sense``."""
    entries = sorted(anchors.entries, key=lambda e: (e.type, e.sense_index))
    if not entries:
        raise EmptyCollection("no anchors")
    labels = [e.label for e in entries]
    X = EmbeddingMatrix.from_rows([e.target_anchor for e in entries], labels)
    Y = EmbeddingMatrix.from_rows([e.source_anchor for e in entries], labels)
    if X.dim != Y.dim:
        raise DimensionMismatch(f"target anchors have dim {X.dim}, source anchors {Y.dim}")
    return unit_normalize_columns(X), unit_normalize_columns(Y)


def normalize_collection(coll: TypeCollection, use_in: bool, iterations: int):
    """Return ``(collection, target_in, source_in)`` with every stored vector normalized."""
    _, tgt, src = coll.stacked()
    if use_in:
        target_in, tgt_m = fit_iterative_normalization(EmbeddingMatrix.from_rows(tgt), iterations)
        source_in, src_m = fit_iterative_normalization(EmbeddingMatrix.from_rows(src), iterations)
    else:
        target_in = source_in = INTransform.identity(coll.dim)
        tgt_m = unit_normalize_columns(EmbeddingMatrix.from_rows(tgt))
        src_m = unit_normalize_columns(EmbeddingMatrix.from_rows(src))
    return coll.replace_stacked(tgt_m.values.T, src_m.values.T), target_in, source_in


def fit_mapping(coll: TypeCollection, cfg: PipelineConfig = PipelineConfig()) -> TrainingResult:
    """Train on an already collected TypeCollection (steps 2-5)."""
    if len(coll) == 0:
        raise EmptyCollection("type collection is empty")
    normed, target_in, source_in = normalize_collection(coll, cfg.use_in, cfg.in_iterations)
    anchors = derive_sense_anchors(normed, cfg.effective_clustering(), cfg.level)
    X_s, Y_s = build_anchor_matrices(anchors)
    W = solve_procrustes(X_s, Y_s)
    notes = []
    if X_s.count < X_s.dim:
        msg = f"only {X_s.count} anchors for dimension {X_s.dim}; the map is underdetermined"
        warnings.warn(msg, InsufficientAnchors, stacklevel=2)
        notes.append(msg)
    artifact = MappingArtifact(
        dim=coll.dim,
        level=cfg.level,
        W=W.values,
        target_in=target_in,
        source_in=source_in,
        anchor_count=X_s.count,
        residual=W.residual,
        settings=cfg.settings(),
        seeds={"clustering": cfg.seed},
        warnings=notes,
    )
    return TrainingResult(artifact, anchors, X_s, Y_s, normed)


def collect(target, source, alignments, cfg: PipelineConfig = PipelineConfig()) -> TypeCollection:
    if isinstance(alignments, (str, os.PathLike)):
        alignments = read_alignments(alignments)
    if cfg.target_side == "right":
        alignments = AlignmentSet(alignments).swapped()
    return collect_type_pairs(target, source, alignments, cap=cfg.cap, lowercase=cfg.lowercase)


def train_mapping(target, source, alignments, cfg: PipelineConfig = PipelineConfig()) -> MappingArtifact:
    """Learn the target-to-source map from two corpora and their alignments.

    ``target``/``source`` are corpus paths (or record iterables) and
    ``alignments`` a Pharaoh file path or AlignmentSet.
    """
    return fit_mapping(collect(target, source, alignments, cfg), cfg).artifact


def transfer_matrix(artifact: MappingArtifact, X: EmbeddingMatrix) -> EmbeddingMatrix:
    """Map target vectors (columns) into the source space: ``W @ IN(x)``."""
    if X.dim != artifact.dim:
        raise DimensionMismatch(f"vectors have dim {X.dim}, artifact has dim {artifact.dim}")
    return apply_map(artifact.map, apply_in(artifact.target_in, X))


def transfer_vector(artifact: MappingArtifact, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionMismatch("expected a single vector")
    if x.shape[0] != artifact.dim:
        raise DimensionMismatch(f"vector has length {x.shape[0]}, artifact has dim {artifact.dim}")
    return transfer_matrix(artifact, EmbeddingMatrix(x[:, None])).values[:, 0]


# -- serialization -----------------------------------------------------------

def _check_float(v: float) -> float:
    if not math.isfinite(v):
        raise ValueError("cannot serialize non-finite value")
    return v


def artifact_to_json(a: MappingArtifact) -> str:
    # json writes floats with repr(), the shortest string that round-trips a double
    obj = {
        "version": a.version,
        "dim": a.dim,
        "level": a.level,
        "w": a.W.tolist(),
        "target_in_means": a.target_in.means.tolist(),
        "source_in_means": a.source_in.means.tolist(),
        "anchor_count": a.anchor_count,
        "residual": _check_float(float(a.residual)),
        "settings": a.settings,
        "seeds": a.seeds,
        "warnings": list(a.warnings),
    }
    return json.dumps(obj, allow_nan=False) + "\n"


def save_artifact(artifact: MappingArtifact, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(artifact_to_json(artifact))


def load_artifact(path) -> MappingArtifact:
    with open(path, encoding="utf-8") as f:
        text = f.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not a valid mapping artifact ({exc.msg})", path, exc.lineno) from None
    if not isinstance(obj, dict):
        raise FormatError("mapping artifact must be a JSON object", path)
    if "version" not in obj:
        raise FormatError("missing field 'version'", path)
    if obj["version"] != ARTIFACT_VERSION:
        raise VersionMismatch(f"{path}: unsupported artifact version {obj['version']!r}")
    try:
        return MappingArtifact(
            dim=int(obj["dim"]),
            level=str(obj["level"]),
            W=np.array(obj["w"], dtype=np.float64),
            target_in=INTransform(np.array(obj["target_in_means"], dtype=np.float64)),
            source_in=INTransform(np.array(obj["source_in_means"], dtype=np.float64)),
            anchor_count=int(obj["anchor_count"]),
            residual=float(obj["residual"]),
            settings=dict(obj["settings"]),
            seeds=dict(obj["seeds"]),
            warnings=list(obj.get("warnings", [])),
            version=obj["version"],
        )
    except KeyError as exc:
        raise FormatError(f"missing field {exc.args[0]!r}", path) from None
    except (TypeError, ValueError) as exc:
        raise FormatError(f"malformed field ({exc})", path) from None


def write_word2vec(path, M: EmbeddingMatrix) -> None:
    """Word2vec text format: ``N d`` header then ``label v1 ... vd`` per column."""
    if M.labels is None:
        raise ValueError("word2vec export needs labelled columns")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{M.count} {M.dim}\n")
        for label, col in zip(M.labels, M.values.T):
            f.write(label + " " + " ".join(repr(float(v)) for v in col) + "\n")


def read_word2vec(path) -> EmbeddingMatrix:
    with open(path, encoding="utf-8") as f:
        header = f.readline().split()
        if len(header) != 2:
            raise FormatError("expected header 'N d'", path, 1)
        n, d = int(header[0]), int(header[1])
        labels, rows = [], []
        for lineno, line in enumerate(f, start=2):
            parts = line.rstrip("\n").split(" ")
            if len(parts) != d + 1:
                raise FormatError(f"expected a label and {d} values", path, lineno)
            labels.append(parts[0])
            rows.append([float(v) for v in parts[1:]])
    if len(rows) != n:
        raise FormatError(f"header announces {n} vectors, found {len(rows)}", path)
    return EmbeddingMatrix.from_rows(np.array(rows).reshape(n, d), labels, dim=d)
