"""Sense induction: k-means per type, elbow-based k, aligned sense anchors."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import CurveTooShort, EmptyCollection, TooFewVectors
from .ingest import TypeCollection

__all__ = [
    "ClusteringConfig",
    "KMeansResult",
    "AnchorEntry",
    "AnchorPairSet",
    "kmeans",
    "select_k_elbow",
    "wcss_curve",
    "derive_sense_anchors",
]

# Below this the elbow gain is treated as zero (straight-line curves).
_ELBOW_EPS = 1e-12


@dataclass(frozen=True)
class ClusteringConfig:
    k_min: int = 1
    k_max: int = 10
    max_iters: int = 100
    rel_tol: float = 1e-6
    seed: int = 42
    min_cluster_size: int = 5
    min_count: int = 100

    def __post_init__(self):
        for name in ("k_min", "k_max", "max_iters", "min_cluster_size", "min_count"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.k_min > self.k_max:
            raise ValueError(f"k_min={self.k_min} exceeds k_max={self.k_max}")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")


@dataclass
class KMeansResult:
    assignments: np.ndarray
    centroids: np.ndarray  # (k, dim)
    wcss: float
    history: List[float] = field(default_factory=list)  # WCSS after each Lloyd iteration

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


def _sq_dists(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    out = np.empty((X.shape[0], centroids.shape[0]))
    for j, c in enumerate(centroids):
        diff = X - c
        out[:, j] = np.einsum("ij,ij->i", diff, diff)
    return out


def _kmeans_pp(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = _sq_dists(X, X[chosen])[:, 0]
    for _ in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            taken = set(chosen)
            idx = next(i for i in range(n) if i not in taken)
        else:
            cum = np.cumsum(d2)
            idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
            idx = min(idx, n - 1)
        chosen.append(idx)
        d2 = np.minimum(d2, _sq_dists(X, X[idx][None, :])[:, 0])
    return X[chosen].copy()


def _repair_empty(assign: np.ndarray, dists: np.ndarray, centroids: np.ndarray, X: np.ndarray) -> None:
    k = centroids.shape[0]
    sizes = np.bincount(assign, minlength=k)
    own = dists[np.arange(len(assign)), assign].copy()
    for j in np.flatnonzero(sizes == 0):
        movable = sizes[assign] >= 2
        cand = np.where(movable, own, -1.0)
        i = int(np.argmax(cand))  # first max: lowest index wins ties
        sizes[assign[i]] -= 1
        sizes[j] += 1
        assign[i] = j
        own[i] = 0.0
        centroids[j] = X[i]


def kmeans(vectors, k: int, cfg: ClusteringConfig = ClusteringConfig()) -> KMeansResult:
    """Lloyd's algorithm from a k-means++ start seeded with ``cfg.seed``.

    Stops after ``cfg.max_iters`` iterations or once the relative WCSS
    improvement drops below ``cfg.rel_tol``.  A cluster that goes empty is
    re-seeded with the point farthest from its centroid.
    """
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("vectors must be a 2-d (n, dim) array")
    n = X.shape[0]
    if k < 1:
        raise ValueError("k must be positive")
    if k > n:
        raise TooFewVectors(f"k={k} exceeds the number of vectors ({n})")

    rng = np.random.default_rng(cfg.seed)
    centroids = _kmeans_pp(X, k, rng)
    history: List[float] = []
    assign = np.zeros(n, dtype=np.intp)
    for _ in range(cfg.max_iters):
        dists = _sq_dists(X, centroids)
        assign = np.argmin(dists, axis=1)
        _repair_empty(assign, dists, centroids, X)
        for j in range(k):
            centroids[j] = X[assign == j].mean(axis=0)
        diff = X - centroids[assign]
        wcss = float(np.einsum("ij,ij->", diff, diff))
        prev = history[-1] if history else None
        history.append(wcss)
        if wcss == 0.0:
            break
        if prev is not None and prev - wcss < cfg.rel_tol * prev:
            break
    return KMeansResult(assign, centroids, history[-1], history)


def select_k_elbow(curve: Sequence[Tuple[int, float]]) -> int:
    """Pick k at the knee of a WCSS-vs-k curve.

    Both axes are rescaled to [0, 1]; the knee is the k maximizing
    ``(1 - y) - x``, i.e. the point farthest below the chord.  A curve with no
    point below the chord returns the smallest k.
    """
    if len(curve) == 0:
        raise CurveTooShort("empty WCSS curve")
    ks = np.array([k for k, _ in curve], dtype=np.float64)
    if len(curve) == 1:
        return int(ks[0])
    if np.any(np.diff(ks) != 1):
        raise ValueError("curve must cover consecutive k values in ascending order")
    w = np.array([v for _, v in curve], dtype=np.float64)
    w = np.minimum.accumulate(w)  # clamp upward blips
    x = (ks - ks[0]) / (ks[-1] - ks[0])
    span = w[0] - w[-1]
    y = (w - w[-1]) / span if span > 0 else np.zeros_like(w)
    d = (1.0 - y) - x
    best = int(np.argmax(d))
    if d[best] <= _ELBOW_EPS:
        return int(ks[0])
    return int(ks[best])


def wcss_curve(X: np.ndarray, cfg: ClusteringConfig) -> Dict[int, KMeansResult]:
    """k-means runs for every k in the search range allowed for ``len(X)`` vectors."""
    n = X.shape[0]
    k_hi = max(1, min(cfg.k_max, n // cfg.min_cluster_size, n))
    k_lo = min(cfg.k_min, k_hi)
    return {k: kmeans(X, k, cfg) for k in range(k_lo, k_hi + 1)}


@dataclass
class AnchorEntry:
    type: str
    sense_index: int
    target_anchor: np.ndarray
    source_anchor: np.ndarray
    support: int

    @property
    def label(self) -> str:
        return f"{self.type}@{self.sense_index}"


@dataclass
class AnchorPairSet:
    entries: List[AnchorEntry]
    selected_k: Dict[str, int] = field(default_factory=dict)  # only clustered types

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def senses_per_type(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for e in self.entries:
            out[e.type] = out.get(e.type, 0) + 1
        return out


def _merge_small(assign: np.ndarray, centroids: np.ndarray, min_size: int) -> np.ndarray:
    k = centroids.shape[0]
    sizes = np.bincount(assign, minlength=k)
    keep = np.flatnonzero(sizes >= min_size)
    if keep.size == 0:
        keep = np.array([int(np.argmax(sizes))])
    target = np.arange(k)
    for j in range(k):
        if j in keep:
            continue
        d = np.sum((centroids[keep] - centroids[j]) ** 2, axis=1)
        target[j] = keep[int(np.argmin(d))]
    merged = target[assign]
    # relabel survivors 0..s-1 in original index order
    relabel = {int(c): i for i, c in enumerate(keep)}
    return np.array([relabel[int(c)] for c in merged], dtype=np.intp)


def derive_sense_anchors(
    coll: TypeCollection, cfg: ClusteringConfig = ClusteringConfig(), level: str = "sense"
) -> AnchorPairSet:
    """Mean (target, source) anchors per type, or per induced sense.

    At sense level, types observed more than ``cfg.min_count`` times are
    clustered on their target vectors; the partition is carried over to the
    paired source vectors.  Rarer types get one word-level anchor.
    """
    if level not in ("word", "sense"):
        raise ValueError(f"level must be 'word' or 'sense', got {level!r}")
    if len(coll) == 0:
        raise EmptyCollection("type collection is empty")
    entries: List[AnchorEntry] = []
    selected: Dict[str, int] = {}
    for type_ in coll.types():
        T, S = coll.pairs(type_)
        if level == "word" or coll.counts[type_] <= cfg.min_count:
            entries.append(AnchorEntry(type_, 0, T.mean(axis=0), S.mean(axis=0), len(T)))
            continue
        runs = wcss_curve(T, cfg)
        k = select_k_elbow([(kk, r.wcss) for kk, r in runs.items()])
        selected[type_] = k
        run = runs[k]
        labels = _merge_small(run.assignments, run.centroids, cfg.min_cluster_size)
        for s in range(int(labels.max()) + 1):
            mask = labels == s
            entries.append(
                AnchorEntry(type_, s, T[mask].mean(axis=0), S[mask].mean(axis=0), int(mask.sum()))
            )
    return AnchorPairSet(entries, selected)
