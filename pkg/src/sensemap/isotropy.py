"""Anisotropy diagnostics and iterative normalization.

Iterative normalization alternates two steps over a population of vectors:
subtract the population mean, then rescale every vector to unit length.  The
means are recorded so the same transform can be replayed on unseen vectors.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .errors import DegenerateVector, DimensionMismatch, InsufficientVectors
from .linalg import NORM_FLOOR, EmbeddingMatrix

__all__ = [
    "INTransform",
    "anisotropy_score",
    "mean_pairwise_cosine",
    "fit_iterative_normalization",
    "apply_in",
    "in_convergence",
    "DEFAULT_IN_ITERATIONS",
    "CONVERGED_MEAN_NORM",
]

DEFAULT_IN_ITERATIONS = 5
CONVERGED_MEAN_NORM = 1e-9
# Rows per block when summing the pairwise cosine matrix.
_BLOCK = 256


@dataclass(frozen=True, eq=False)
class INTransform:
    """Per-iteration means of a fitted iterative normalization."""

    means: np.ndarray  # (iterations, dim)

    def __post_init__(self):
        means = np.array(self.means, dtype=np.float64, copy=True)
        if means.ndim != 2 or means.shape[0] < 1 or means.shape[1] < 1:
            raise ValueError(f"means must be a non-empty (iterations, dim) array, got {means.shape}")
        if not np.all(np.isfinite(means)):
            raise ValueError("INTransform means must be finite")
        means.setflags(write=False)
        object.__setattr__(self, "means", means)

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def iterations(self) -> int:
        return self.means.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "INTransform":
        """A single zero mean: replaying it only unit-normalizes."""
        return cls(np.zeros((1, dim)))


def _unit_columns(values: np.ndarray, what: str = "column") -> np.ndarray:
    norms = np.linalg.norm(values, axis=0)
    bad = np.flatnonzero(norms < NORM_FLOOR)
    if bad.size:
        raise DegenerateVector(f"{what} {int(bad[0])} has norm {norms[bad[0]]:.3g}")
    return values / norms


def mean_pairwise_cosine(values: np.ndarray) -> float:
    """Mean cosine similarity over all unordered pairs of distinct columns.

    Blocks are reduced in a fixed order, so the result does not depend on how
    many threads the BLAS backend uses.
    """
    unit = _unit_columns(values)
    m = unit.shape[1]
    if m < 2:
        raise InsufficientVectors(f"need at least 2 vectors, got {m}")
    total = 0.0
    for start in range(0, m, _BLOCK):
        stop = min(start + _BLOCK, m)
        block = unit[:, start:stop]
        # upper triangle only: pairs (i, j) with i < j
        rest = unit[:, start:]
        gram = np.einsum("di,dj->ij", block, rest)
        rows = np.arange(stop - start)[:, None]
        cols = np.arange(rest.shape[1])[None, :]
        total += float(np.sum(gram[cols > rows]))
    return total / (m * (m - 1) / 2)


def anisotropy_score(M: EmbeddingMatrix, sample_size: int = 1000, seed: int = 0) -> float:
    """Mean pairwise cosine among ``min(sample_size, count)`` sampled columns.

    Columns are drawn without replacement with ``numpy.random.default_rng(seed)``.
    Close to 0 for an isotropic cloud, close to 1 for a narrow cone.
    """
    if sample_size < 1:
        raise ValueError("sample_size must be positive")
    n = M.count
    if n < 2:
        raise InsufficientVectors(f"need at least 2 vectors, got {n}")
    values = M.values
    if sample_size < n:
        rng = np.random.default_rng(seed)
        idx = np.sort(rng.choice(n, size=sample_size, replace=False))
        values = values[:, idx]
    return mean_pairwise_cosine(values)


def _in_step(values: np.ndarray, mean: np.ndarray) -> np.ndarray:
    return _unit_columns(values - mean[:, None], "column after centering")


def fit_iterative_normalization(
    M: EmbeddingMatrix, iterations: int = DEFAULT_IN_ITERATIONS
) -> Tuple[INTransform, EmbeddingMatrix]:
    """Fit iterative normalization and return ``(transform, transformed)``.

    Once the population mean falls below 1e-9 in norm the loop stops and the
    remaining iterations are recorded as zero means.
    """
    if iterations < 1:
        raise ValueError("iterations must be positive")
    if M.count < 2:
        raise InsufficientVectors(f"need at least 2 vectors, got {M.count}")
    values = M.values
    means: List[np.ndarray] = []
    for _ in range(iterations):
        mu = values.mean(axis=1)
        if np.linalg.norm(mu) < CONVERGED_MEAN_NORM:
            break
        means.append(mu)
        values = _in_step(values, mu)
    converged_from = len(means)
    means.extend(np.zeros(M.dim) for _ in range(iterations - converged_from))
    # zero-mean iterations still renormalize; keep fit and replay identical
    for _ in range(iterations - converged_from):
        values = _unit_columns(values, "column after centering")
    return INTransform(np.stack(means)), M.with_values(values)


def apply_in(T: INTransform, M: EmbeddingMatrix) -> EmbeddingMatrix:
    """Replay a fitted transform: for each stored mean, center then unit-normalize."""
    if T.dim != M.dim:
        raise DimensionMismatch(f"transform has dim {T.dim}, matrix has dim {M.dim}")
    values = M.values
    for mu in T.means:
        values = _in_step(values, mu)
    return M.with_values(values)


def in_convergence(
    M: EmbeddingMatrix, iterations: int = DEFAULT_IN_ITERATIONS, sample_size: int = 1000, seed: int = 0
):
    """Per-iteration ``(iteration, mean_norm, anisotropy_score)`` rows.

    Row 0 describes the input; row ``t`` the population after ``t`` iterations,
    with ``mean_norm`` the norm of the mean subtracted at that iteration.
    """
    transform, _ = fit_iterative_normalization(M, iterations)
    rows = [(0, float(np.linalg.norm(M.values.mean(axis=1))), anisotropy_score(M, sample_size, seed))]
    current = M
    for t, mu in enumerate(transform.means, start=1):
        current = apply_in(INTransform(mu[None, :]), current)
        rows.append((t, float(np.linalg.norm(mu)), anisotropy_score(current, sample_size, seed)))
    return transform, current, rows
