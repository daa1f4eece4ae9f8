"""Focus regions and the statistical validation pipeline on the demo task.

Run: python demos/04_focus_regions_and_statistics.py
"""

import numpy as np

from conspec import (
    elicit_predicates,
    filter_significant,
    load_manifest,
    region_a1,
    region_a2,
    region_gamma,
    relevant_concepts,
    satisfaction_probability,
)
from conspec.directions import CaptionTemplateSet, TextEmbedder, direction_table
from conspec.fixtures import mini_rival_dir
from conspec.regions import region_a3, surrogate_partition
from conspec.repmap import RepMap, RepMode

root = mini_rival_dir()
man = load_manifest(root / "manifest.json")
G = man.load_embeddings("vlm")
F = man.load_embeddings("vision")

# Boxes approximating "in-distribution truck embeddings", tightest last.
a1 = region_a1(F, "truck")
a2 = region_a2(F, "truck")
print("A1 width:", round(float(np.sum(a1.upper - a1.lower)), 3))
print("A2 width:", round(float(np.sum(a2.upper - a2.lower)), 3), "(correct rows only)")
for g in (0.25, 1.0, 2.0):
    box = region_gamma(G, "truck", g)
    print(f"gamma={g}: width {float(np.sum(box.upper - box.lower)):.3f}")

# A3 splits the predicted-truck rows into cells (a stand-in partition here).
part = surrogate_partition(F, F.rows_where_predicted("truck"), k=2)
print("A3 cells:", [b.tag() for b in region_a3(F, "truck", part)])

# Which concepts are relevant for trucks? Strictly above 70% annotation rate.
relevant = relevant_concepts(G, "truck")
print("relevant for truck:", sorted(relevant))

# Every (relevant, irrelevant) pair becomes a strength predicate...
preds = elicit_predicates(relevant, man.concept_names, "truck")
print(f"{len(relevant)} relevant x {len(man.concept_names) - len(relevant)} irrelevant"
      f" = {len(preds)} predicates")

# ...whose satisfaction rate is measured over the class rows.
embedder = TextEmbedder.from_csv(root / "captions.csv")
templates = CaptionTemplateSet.from_file(root / "templates.txt")
rep = RepMap(RepMode.VLM_ONLY, direction_table(man.concept_names, templates, embedder))
report = satisfaction_probability(G, preds, rep, "truck", split="train")
for entry in report.entries:
    print(f"  {entry.predicate.stronger:>9} > {entry.predicate.weaker:<9} "
          f"{entry.probability:.2f} ({entry.satisfied}/{entry.total})")

significant = filter_significant(report)
print("kept for verification (strictly above 95%):")
for p in significant:
    print("  ", p.spec_text())
