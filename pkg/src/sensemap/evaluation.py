"""Nearest-neighbour retrieval checks for a learned map against known truth."""
from __future__ import annotations

from typing import Dict, Iterable, Mapping

import numpy as np

from .errors import MissingLabel
from .isotropy import apply_in
from .linalg import EmbeddingMatrix

__all__ = ["retrieval_precision", "precision_at", "evaluate_artifact", "map_recovery_error"]


def _ranks_of_truth(mapped: EmbeddingMatrix, sources: EmbeddingMatrix, truth: Mapping[str, str]) -> np.ndarray:
    if mapped.labels is None or sources.labels is None:
        raise MissingLabel("both matrices must carry column labels")
    # lexicographic label order first, then a stable sort by similarity
    order = sorted(range(sources.count), key=lambda j: sources.labels[j])
    src_labels = [sources.labels[j] for j in order]
    position = {label: i for i, label in enumerate(src_labels)}
    S = sources.values[:, order]
    S = S / np.linalg.norm(S, axis=0)
    T = mapped.values / np.linalg.norm(mapped.values, axis=0)

    wanted = np.empty(mapped.count, dtype=np.intp)
    for i, label in enumerate(mapped.labels):
        if label not in truth:
            raise MissingLabel(f"no truth entry for target label {label!r}")
        if truth[label] not in position:
            raise MissingLabel(f"truth label {truth[label]!r} is not a source column")
        wanted[i] = position[truth[label]]

    sims = T.T @ S
    ranking = np.argsort(-sims, axis=1, kind="stable")
    return np.argmax(ranking == wanted[:, None], axis=1)


def retrieval_precision(
    mapped: EmbeddingMatrix, sources: EmbeddingMatrix, truth: Mapping[str, str], k: int = 1
) -> float:
    """Fraction of mapped target columns whose true source is among the k most cosine-similar."""
    if k < 1:
        raise ValueError("k must be positive")
    ranks = _ranks_of_truth(mapped, sources, truth)
    return float(np.mean(ranks < k))


def precision_at(
    mapped: EmbeddingMatrix, sources: EmbeddingMatrix, truth: Mapping[str, str], ks: Iterable[int] = (1, 5)
) -> Dict[int, float]:
    ranks = _ranks_of_truth(mapped, sources, truth)
    return {k: float(np.mean(ranks < k)) for k in ks}


def evaluate_artifact(artifact, truth, ks: Iterable[int] = (1, 5)) -> Dict[int, float]:
    """P@k of the ground-truth target sense vectors mapped through ``artifact``.

    Source sense vectors go through the artifact's source-side normalization
    so both sides live in the space the map was learned in.
    """
    from .pipeline import transfer_matrix

    mapped = transfer_matrix(artifact, truth.target_matrix())
    sources = apply_in(artifact.source_in, truth.source_matrix())
    return precision_at(mapped, sources, truth.type_truth, ks)


def map_recovery_error(W: np.ndarray, A: np.ndarray) -> float:
    """``||W - A^T||_F / sqrt(d)`` for a map W meant to invert the planted A."""
    W = np.asarray(W)
    return float(np.linalg.norm(W - np.asarray(A).T) / np.sqrt(W.shape[0]))
