"""Aligning a vision model's embedding space to the caption space.

Run: python demos/03_affine_alignment.py
"""

import numpy as np

from conspec import EmbeddingSet, check_faithfulness, fit_affine_map, map_metrics, rep_value
from conspec.directions import ConceptDirection
from conspec.repmap import RepMap, RepMode

rng = np.random.default_rng(1)

# Two embedding spaces related by an affine ground truth plus noise: this is
# the usual situation when a vision backbone and a language-image model were
# trained separately but describe the same images.
p = 6
M_true = rng.normal(size=(p, p))
d_true = rng.normal(size=p)
W = rng.normal(size=(300, p))            # vision embeddings
Z = W @ M_true.T + d_true                 # language-image embeddings
Z_noisy = Z + 0.05 * rng.normal(size=Z.shape)

ids = tuple(f"img{i}" for i in range(300))
F = EmbeddingSet(ids, W)
G = EmbeddingSet(ids, Z_noisy)

m = fit_affine_map(F, G)
q = map_metrics(m, F, G)
print(f"fit quality on noisy data: mse={q.mse:.4f}  r2={q.r2:.4f}")
print(f"recovered M error: {np.max(np.abs(m.M - M_true)):.3f} (noise-limited)")

# Concept strengths can now be computed for vision embeddings by mapping
# them into the direction space first.
dirs = {"shiny": ConceptDirection("shiny", rng.normal(size=p), 1)}
via = RepMap(RepMode.VIA_AFFINE, dirs, map=m)
native = RepMap(RepMode.VLM_ONLY, dirs)
w = W[0]
print("strength via map:  ", rep_value(via, "shiny", w))
print("strength in space: ", rep_value(native, "shiny", Z_noisy[0]))

# Faithfulness audit: which rows does the map distort enough to matter?
violations = check_faithfulness(m, F, G, tol=0.2)
print(f"{len(violations)} rows farther than 0.2 from their true embedding")
exact = check_faithfulness(fit_affine_map(F, EmbeddingSet(ids, Z)), F, EmbeddingSet(ids, Z), tol=1e-6)
print(f"on noise-free data the fitted map is exact: {len(exact)} violations")
