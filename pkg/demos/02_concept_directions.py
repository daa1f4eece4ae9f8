"""Concept directions from caption embeddings and the zero-shot head.

Run: python demos/02_concept_directions.py
"""

import numpy as np

from conspec import TextEmbedder, concept_direction, default_templates, expand_captions, zero_shot_classify
from conspec.directions import CaptionTemplateSet

templates = default_templates()
print(f"{len(templates)} caption templates shipped; first three:")
for t in templates.templates[:3]:
    print("  ", t)
print("expanded:", expand_captions(CaptionTemplateSet(templates.templates[:2]), "wheels"))

# Caption embeddings usually come from a text encoder via captions.csv.
# Here we fake a 2-D embedding space where dimension 0 means "vehicle-ness"
# and dimension 1 means "animal-ness"; each caption lands near its concept.
rng = np.random.default_rng(0)
table = {}
for name, axis in [("truck", 0), ("cat", 1), ("wheels", 0), ("ears", 1)]:
    for caption in expand_captions(templates, name):
        vec = np.zeros(2)
        vec[axis] = 1.0
        table[caption] = vec + rng.normal(scale=0.15, size=2)
embedder = TextEmbedder(table)

# A direction is just the mean caption embedding; the mean washes out the
# per-caption noise (69 captions here).
wheels = concept_direction("wheels", templates, embedder)
ears = concept_direction("ears", templates, embedder)
print("wheels direction:", np.round(wheels.direction, 3), f"({wheels.caption_count} captions)")
print("ears direction:  ", np.round(ears.direction, 3))

# Class directions turn cosine similarity into a classifier.
truck = concept_direction("truck", templates, embedder)
cat = concept_direction("cat", templates, embedder)
for img in ([0.9, 0.1], [0.2, 1.1], [0.7, 0.7]):
    label = zero_shot_classify(np.array(img), [truck, cat])
    print(f"image embedding {img} -> {label.name}")
