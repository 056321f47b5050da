"""
Anisotropy and iterative normalization
======================================

A Gaussian cloud pushed away from the origin occupies a narrow cone: the
mean cosine between random members is close to one.  Iterative
normalization (center, then rescale to unit length, repeated) removes it,
and the fitted means can be replayed on new vectors.
"""

# %%
import numpy as np

from sensemap import EmbeddingMatrix, anisotropy_score, apply_in
from sensemap.isotropy import in_convergence

rng = np.random.default_rng(1)
dim = 64
offset = rng.standard_normal(dim)
offset *= 5 / np.linalg.norm(offset)
cloud = EmbeddingMatrix(rng.standard_normal((dim, 5000)) / np.sqrt(dim) + offset[:, None])

print("isotropic reference:", round(anisotropy_score(EmbeddingMatrix(rng.standard_normal((dim, 5000)))), 4))
print("shifted cloud:      ", round(anisotropy_score(cloud, sample_size=1000, seed=0), 4))

# %%
# Convergence table: the score collapses after the first iteration.
transform, normalized, rows = in_convergence(cloud, iterations=5, sample_size=1000, seed=0)
print(f"{'iter':>4} {'|mean|':>12} {'anisotropy':>12}")
for t, mean_norm, score in rows:
    print(f"{t:>4} {mean_norm:>12.3e} {score:>12.5f}")

# %%
# Replay on held-out vectors drawn from the same distribution.
held_out = EmbeddingMatrix(rng.standard_normal((dim, 1000)) / np.sqrt(dim) + offset[:, None])
print("held-out after replay:", round(anisotropy_score(apply_in(transform, held_out)), 5))
