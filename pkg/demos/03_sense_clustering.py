"""
Splitting a two-sense word
==========================

The target vectors of one word type form two clusters (two senses), and
each cluster is aligned to a different source word.  k-means over a range
of k plus the elbow rule finds both senses; the source side is split by the
same partition, giving one anchor pair per sense.
"""

# %%
import numpy as np

from sensemap import ClusteringConfig, TypeCollection, derive_sense_anchors, kmeans, select_k_elbow

rng = np.random.default_rng(2)
dim, n = 16, 300
sense_t = rng.standard_normal((2, dim))
sense_s = rng.standard_normal((2, dim))
which = rng.integers(0, 2, n)
targets = sense_t[which] + 0.05 * rng.standard_normal((n, dim))
sources = sense_s[which] + 0.05 * rng.standard_normal((n, dim))

# %%
cfg = ClusteringConfig()
curve = [(k, kmeans(targets, k, cfg).wcss) for k in range(1, 11)]
for k, w in curve:
    print(f"k={k:2d}  WCSS={w:10.3f}")
print("elbow picks k =", select_k_elbow(curve))

# %%
coll = TypeCollection(dim)
for t, s in zip(targets, sources):
    coll.add("bank", t, s)
for e in derive_sense_anchors(coll, cfg, level="sense"):
    nearest = int(np.argmin(np.linalg.norm(sense_s - e.source_anchor, axis=1)))
    err = np.linalg.norm(e.source_anchor - sense_s[nearest])
    print(f"{e.label}: support {e.support}, source anchor is {err:.4f} from source sense {nearest}")
