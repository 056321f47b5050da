"""
Orthogonal Procrustes in two dimensions
=======================================

Recover a planted rotation, then a planted reflection, from paired columns.
Run with ``python demos/01_procrustes.py``.
"""

# %%
import numpy as np

from sensemap import EmbeddingMatrix, apply_map, solve_procrustes

rng = np.random.default_rng(0)

# %%
# A quarter turn: columns e1, e2 land on (0, 1) and (-1, 0).
X = EmbeddingMatrix(np.eye(2))
Y = EmbeddingMatrix([[0.0, -1.0], [1.0, 0.0]])
W = solve_procrustes(X, Y)
print("quarter turn\n", W.values.round(12), "\nresidual", W.residual)

# %%
# Reflections are allowed, so a flip of the second axis is recovered exactly.
X = rng.standard_normal((2, 10))
flip = np.diag([1.0, -1.0])
W = solve_procrustes(EmbeddingMatrix(X), EmbeddingMatrix(flip @ X))
print("reflection\n", W.values.round(9), "\ndet", np.linalg.det(W.values).round(6))

# %%
# With noise the map is the least-squares orthogonal fit; norms survive it.
theta = 0.7
R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
X = rng.standard_normal((2, 200))
Y = R @ X + 0.05 * rng.standard_normal((2, 200))
W = solve_procrustes(EmbeddingMatrix(X), EmbeddingMatrix(Y))
angle = np.arctan2(W.values[1, 0], W.values[0, 0])
print(f"planted angle {theta:.4f}, recovered {angle:.4f}, residual {W.residual:.3f}")
mapped = apply_map(W, EmbeddingMatrix(X))
print("max norm change", np.max(np.abs(np.linalg.norm(mapped.values, axis=0) - np.linalg.norm(X, axis=0))))
