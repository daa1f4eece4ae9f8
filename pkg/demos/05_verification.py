"""Proving and refuting specifications over boxes with the LP verifier.

Run: python demos/05_verification.py
"""

import numpy as np

from conspec import TaskVocabulary, desugar, parse_spec, to_lp_queries, verify_spec
from conspec.directions import ConceptDirection
from conspec.oracle import grid_violation_oracle
from conspec.regions import BoxRegion
from conspec.repmap import AffineMap
from conspec.verifier import LinearHead, VerificationContext

# A 1-D worked example small enough to solve by hand.  The classifier head
# scores class c0 as +w and c1 as -w, so every w in [0.5, 1] is classified
# c0.  Concept con1 points along +1, con2 along -1.
vocab = TaskVocabulary.make(["con1", "con2"], ["c0", "c1"])
head = LinearHead(np.array([[1.0], [-1.0]]), np.zeros(2), ("c0", "c1"))
dirs = {
    "con1": ConceptDirection("con1", np.array([1.0]), 1),
    "con2": ConceptDirection("con2", np.array([-1.0]), 1),
}
box = BoxRegion(np.array([0.5]), np.array([1.0]), "A1", "c0")
ctx = VerificationContext(
    box=box, concept_dirs=dirs, head=head,
    map=AffineMap(np.array([[1.0]]), np.array([0.0])),
    class_labels=vocab.classes,
)

spec = desugar(parse_spec("predict(c0) => gt(con1, con2)", vocab), vocab)

# The verifier maximizes the violation slack over each clause of the negated
# spec.  Negative slack = proof with margin; positive slack = counterexample.
out = verify_spec(spec, ctx)
print(f"outcome: {out.kind}, slack {out.epsilon:+.3f} at w = {out.point}")

# Swap the directions and the same spec breaks, maximally at w = 1.
ctx_bad = VerificationContext(
    box=box, class_labels=vocab.classes, head=head, map=ctx.map,
    concept_dirs={
        "con1": ConceptDirection("con1", np.array([-1.0]), 1),
        "con2": ConceptDirection("con2", np.array([1.0]), 1),
    },
)
out_bad = verify_spec(spec, ctx_bad)
print(f"swapped: {out_bad.kind}, slack {out_bad.epsilon:+.3f} at w = {out_bad.point}")

# An antecedent that never fires in the box is reported vacuous, not proved.
dead = desugar(parse_spec("predict(c1) => gt(con1, con2)", vocab), vocab)
print("dead antecedent:", verify_spec(dead, ctx).kind)

# The grid oracle re-derives the slack by brute force; it can never beat the
# LP (it searches a finite subset) and should land within a step of it.
(clause,) = to_lp_queries(spec)
grid = grid_violation_oracle(clause, ctx, step=1e-3)
print(f"grid audit: {grid.status}, slack {grid.epsilon:+.4f} "
      f"({grid.points_checked} points)")

# Nested boxes can only shrink the slack: tighter in-distribution
# approximations make specifications easier to prove.
for width in (0.5, 0.25, 0.1):
    small = BoxRegion(np.array([0.5]), np.array([0.5 + width]), "A2")
    ctx_small = VerificationContext(
        box=small, concept_dirs=ctx_bad.concept_dirs, head=head, map=ctx.map,
        class_labels=vocab.classes,
    )
    print(f"box width {width}: slack {verify_spec(spec, ctx_small).epsilon:+.3f}")
