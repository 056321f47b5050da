"""Independent reference computations used by the tests.

Nothing here calls into the package's solvers; each oracle takes a
different route to the same answer (brute force, grid search, loops).
"""
import math

import numpy as np


def frobenius_loop(a):
    total = 0.0
    for row in np.asarray(a).tolist():
        for v in row:
            total += v * v
    return math.sqrt(total)


def grid_search_2d(X, Y, step=1e-4):
    """Best orthogonal 2x2 map by exhaustive search over rotations and reflections.

    Returns ``(W, residual)``.
    """
    theta = np.arange(0.0, 2 * np.pi, step)
    c, s = np.cos(theta), np.sin(theta)
    best = (None, np.inf)
    # rotation [[c,-s],[s,c]] and reflection [[c,s],[s,-c]]
    for mats in (
        np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], 1),
        np.stack([np.stack([c, s], -1), np.stack([s, -c], -1)], 1),
    ):
        diff = np.einsum("tij,jn->tin", mats, X) - Y[None]
        res = np.sqrt(np.einsum("tin,tin->t", diff, diff))
        i = int(np.argmin(res))
        if res[i] < best[1]:
            best = (mats[i], float(res[i]))
    return best


def mean_pairwise_cosine_loop(vectors):
    """Mean cosine over unordered distinct pairs, by explicit double loop."""
    V = [np.asarray(v, dtype=float) for v in vectors]
    total, pairs = 0.0, 0
    for i in range(len(V)):
        for j in range(i + 1, len(V)):
            total += float(V[i] @ V[j]) / (np.linalg.norm(V[i]) * np.linalg.norm(V[j]))
            pairs += 1
    return total / pairs


def wcss_brute(points, labels):
    points = np.asarray(points, dtype=float)
    total = 0.0
    for lab in set(labels.tolist()):
        members = points[labels == lab]
        centre = members.sum(axis=0) / len(members)
        total += float(((members - centre) ** 2).sum())
    return total


def elbow_by_hand(ks, wcss):
    """Literal transcription of the normalized-difference knee rule, pure Python."""
    w = list(wcss)
    for i in range(1, len(w)):
        w[i] = min(w[i], w[i - 1])
    xs = [(k - ks[0]) / (ks[-1] - ks[0]) for k in ks]
    span = w[0] - w[-1]
    ys = [(v - w[-1]) / span if span > 0 else 0.0 for v in w]
    ds = [(1 - y) - x for x, y in zip(xs, ys)]
    best = max(range(len(ds)), key=lambda i: (ds[i], -i))
    return ks[best] if ds[best] > 1e-12 else ks[0]
