"""Shipped data: the default caption templates and a synthetic demo task.

The "mini-RIVAL" fixture is a small 16-dimensional classification task
with four classes and six concepts, built so that every pipeline stage has
something real to chew on:

* language-image embeddings give each concept and class its own axis, and
  caption embeddings are noisy copies of those axes;
* vision embeddings are an exact (rotated and shifted) affine image of the
  language-image ones, so map fitting has a recoverable ground truth;
* class-conditional attribute rates are pinned exactly (for instance
  ``wheels`` appears on 100% of trucks but 55% of planes), making
  relevance extraction deterministic;
* a handful of rows are deliberately misclassified so the correctly-
  classified hull is strictly inside the predicted hull;
* ``truck.spec`` plants one specification that provably holds on the
  correct-truck region and one that provably fails.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from ..directions import write_captions_csv
from ..embeddings import write_attributes_csv, write_embeddings_csv, write_labels_csv, EmbeddingSet
from ..verifier import LinearHead, save_head_json

__all__ = ["mini_rival_dir", "generate_mini_rival", "MINI_RIVAL_SEED"]

MINI_RIVAL_SEED = 20240901

CLASSES = ["truck", "car", "cat", "plane"]
CONCEPTS = ["wheels", "metallic", "text", "ears", "tail", "hairy"]

# per-class attribute rates; >0.70 makes a concept relevant for the class
ATTR_RATES = {
    "truck": {"wheels": 1.0, "metallic": 0.95, "text": 0.80, "ears": 0.00, "tail": 0.05, "hairy": 0.00},
    "car":   {"wheels": 1.0, "metallic": 0.90, "text": 0.30, "ears": 0.00, "tail": 0.00, "hairy": 0.05},
    "cat":   {"wheels": 0.0, "metallic": 0.00, "text": 0.05, "ears": 0.95, "tail": 0.85, "hairy": 0.90},
    "plane": {"wheels": 0.55, "metallic": 0.90, "text": 0.75, "ears": 0.00, "tail": 0.30, "hairy": 0.00},
}

DIM = 16
TRAIN_PER_CLASS = 40
TEST_PER_CLASS = 20
MISCLASSIFIED_PER_CLASS = 3  # test-split rows pushed toward a rival class

_CONCEPT_AXIS = {con: i for i, con in enumerate(CONCEPTS)}
_CLASS_AXIS = {cls: 8 + i for i, cls in enumerate(CLASSES)}
_NOISE_DIMS = [6, 7, 12, 13, 14, 15]


def mini_rival_dir() -> Path:
    """Directory of the shipped fixture (regenerate with :func:`generate_mini_rival`)."""
    return Path(resources.files("conspec.fixtures").joinpath("mini_rival"))


def _caption_matrix(rng: np.random.Generator, names: list[str], templates: list[str]) -> tuple[list[str], np.ndarray]:
    captions, rows = [], []
    for name in names:
        axis = _CONCEPT_AXIS.get(name, _CLASS_AXIS.get(name))
        for t in templates:
            vec = np.zeros(DIM)
            vec[axis] = 1.0
            vec += 0.03 * rng.normal(size=DIM)
            captions.append(t.replace("{}", name))
            rows.append(np.round(vec, 6))
    return captions, np.stack(rows)


def _row_embedding(rng: np.random.Generator, cls: str, attrs: dict[str, int], rival: str | None) -> np.ndarray:
    z = 0.02 * rng.normal(size=DIM)
    for con, present in attrs.items():
        if present:
            z[_CONCEPT_AXIS[con]] = rng.uniform(0.8, 1.2)
        else:
            z[_CONCEPT_AXIS[con]] = rng.uniform(-0.05, 0.05)
    if rival is None:
        z[_CLASS_AXIS[cls]] = rng.uniform(0.9, 1.1)
    else:
        z[_CLASS_AXIS[cls]] = 0.3
        z[_CLASS_AXIS[rival]] = rng.uniform(0.6, 0.8)
    return np.round(z, 6)


def generate_mini_rival(out_dir, seed: int = MINI_RIVAL_SEED) -> Path:
    """Write the full fixture (embeddings, labels, attributes, captions,
    head, splits, manifest, planted specs) into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    templates = (
        resources.files("conspec.fixtures").joinpath("templates.txt").read_text("utf-8").splitlines()
    )
    templates = [t for t in templates if t.strip()]

    # ground truth geometry: vlm = Q @ vision + d with Q orthogonal.  Q acts
    # as a signed permutation on the concept/class axes (so boxes stay boxes
    # on the semantic coordinates and planted margins survive the hull) and
    # as a random rotation on the noise dims (so the fit is not a lookup).
    perm = rng.permutation(DIM)
    signs = rng.choice([-1.0, 1.0], DIM)
    Q = np.zeros((DIM, DIM))
    for i in range(DIM):
        Q[i, perm[i]] = signs[i]
    block, _ = np.linalg.qr(rng.normal(size=(len(_NOISE_DIMS), len(_NOISE_DIMS))))
    R = np.eye(DIM)
    R[np.ix_(_NOISE_DIMS, _NOISE_DIMS)] = block
    Q = R @ Q
    d_true = np.round(rng.uniform(-0.5, 0.5, DIM), 6)

    ids, truths, vlm_rows, attr_cols = [], [], [], {c: [] for c in CONCEPTS}
    split_of: dict[str, str] = {}
    for cls in CLASSES:
        total = TRAIN_PER_CLASS + TEST_PER_CLASS
        rates = ATTR_RATES[cls]
        # pin attribute counts exactly so relevance rates are deterministic
        presence = {}
        for con in CONCEPTS:
            count = round(rates[con] * total)
            flags = np.zeros(total, dtype=int)
            flags[rng.permutation(total)[:count]] = 1
            presence[con] = flags
        rival_cycle = [c for c in CLASSES if c != cls]
        for k in range(total):
            rid = f"{cls}-{k:03d}"
            split = "train" if k < TRAIN_PER_CLASS else "test"
            # misclassify a few test rows so A2 is strictly tighter than A1
            rival = None
            if split == "test" and (k - TRAIN_PER_CLASS) < MISCLASSIFIED_PER_CLASS:
                rival = rival_cycle[(k - TRAIN_PER_CLASS) % len(rival_cycle)]
            attrs = {con: int(presence[con][k]) for con in CONCEPTS}
            z = _row_embedding(rng, cls, attrs, rival)
            ids.append(rid)
            truths.append(cls)
            vlm_rows.append(z)
            split_of[rid] = split
            for con in CONCEPTS:
                attr_cols[con].append(attrs[con])

    Z = np.stack(vlm_rows)
    W = np.round((Z - d_true) @ Q, 6)  # Q orthogonal: Q^T applied row-wise

    # linear head scores w via the class axes of the mapped embedding:
    # score_c(w) = (Q w + d)[axis_c], so the head row is the axis_c row of Q
    A = np.round(np.stack([Q[_CLASS_AXIS[c], :] for c in CLASSES]), 6)
    b = np.round(np.array([d_true[_CLASS_AXIS[c]] for c in CLASSES]), 6)
    scores = W @ A.T + b
    predicted = [CLASSES[i] for i in scores.argmax(axis=1)]

    attrs_np = {c: np.array(v, dtype=np.int64) for c, v in attr_cols.items()}
    write_embeddings_csv(out / "embeddings_vision.csv", EmbeddingSet(tuple(ids), W))
    write_embeddings_csv(out / "embeddings_vlm.csv", EmbeddingSet(tuple(ids), Z))
    write_labels_csv(out / "labels.csv", ids, truths, predicted)
    write_attributes_csv(out / "attributes.csv", ids, attrs_np)

    captions, cap_matrix = _caption_matrix(rng, CONCEPTS + CLASSES, templates)
    write_captions_csv(out / "captions.csv", captions, cap_matrix)
    save_head_json(out / "head.json", LinearHead(A, b, tuple(CLASSES)))

    for split in ("train", "test"):
        lines = [rid for rid in ids if split_of[rid] == split]
        (out / f"{split}_ids.txt").write_text("\n".join(lines) + "\n", "utf-8")

    (out / "templates.txt").write_text("\n".join(templates) + "\n", "utf-8")

    manifest = {
        "dim": {"vision": DIM, "vlm": DIM},
        "class_names": CLASSES,
        "concept_names": CONCEPTS,
        "files": {
            "embeddings": {"vision": "embeddings_vision.csv", "vlm": "embeddings_vlm.csv"},
            "labels": "labels.csv",
            "attributes": "attributes.csv",
            "captions": "captions.csv",
            "head": "head.json",
            "templates": "templates.txt",
        },
        "splits": {"train": "train_ids.txt", "test": "test_ids.txt"},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2), "utf-8")

    (out / "truck.spec").write_text(
        "# planted specifications for the truck region\n"
        "predict(truck) => gt(wheels, ears)   # holds by construction\n"
        "predict(truck) => gt(ears, wheels)   # fails by construction\n",
        "utf-8",
    )
    return out
