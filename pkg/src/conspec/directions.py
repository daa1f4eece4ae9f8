"""Caption expansion, concept directions, and the zero-shot head.

A concept's direction in the language-image embedding space is the mean of
the text embeddings of many captions that all mention the concept.  The
same construction applied to class names yields a zero-shot classifier:
pick the class whose direction has the highest cosine similarity with the
image embedding.

Text embeddings are precomputed and ingested as a lookup table keyed by
exact caption text (``captions.csv``, RFC-4180 quoting).  Caption templates
live one per line in ``templates.txt``; the shipped default set has 69
entries.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .embeddings import as_vector, cosine_similarity
from .errors import (
    DimMismatch,
    FormatError,
    MissingCaptionEmbedding,
    ZeroMeanVector,
    ZeroVector,
)
from .lang import ClassLabel

__all__ = [
    "CaptionTemplateSet",
    "ConceptDirection",
    "TextEmbedder",
    "default_templates",
    "expand_captions",
    "concept_direction",
    "direction_table",
    "zero_shot_classify",
    "zero_shot_scores",
    "read_captions_csv",
    "write_captions_csv",
]


@dataclass(frozen=True)
class CaptionTemplateSet:
    """Ordered caption templates, each with exactly one ``{}`` placeholder."""

    templates: tuple[str, ...]

    def __post_init__(self):
        if not self.templates:
            raise ValueError("template set must be non-empty")
        for t in self.templates:
            if t.count("{}") != 1:
                raise ValueError(f"template {t!r} must contain exactly one {{}}")

    def __len__(self) -> int:
        return len(self.templates)

    @classmethod
    def from_file(cls, path) -> "CaptionTemplateSet":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls(tuple(line for line in lines if line.strip()))


def default_templates() -> CaptionTemplateSet:
    """The 69 shipped caption templates."""
    text = resources.files("conspec.fixtures").joinpath("templates.txt").read_text("utf-8")
    return CaptionTemplateSet(tuple(line for line in text.splitlines() if line.strip()))


def expand_captions(templates: CaptionTemplateSet, name: str) -> list[str]:
    """Fill each template's placeholder with ``name``, preserving order."""
    if not name:
        raise ValueError("name must be non-empty")
    return [t.replace("{}", name) for t in templates.templates]


@dataclass(frozen=True)
class ConceptDirection:
    """Unnormalized direction of a named concept plus the caption count behind it."""

    concept: str
    direction: np.ndarray
    caption_count: int

    def __post_init__(self):
        vec = as_vector(self.direction, f"direction of {self.concept!r}")
        if float(np.linalg.norm(vec)) == 0.0:
            raise ZeroVector(f"direction of {self.concept!r} is the zero vector")
        vec.setflags(write=False)
        object.__setattr__(self, "direction", vec)

    @property
    def unit(self) -> np.ndarray:
        return self.direction / np.linalg.norm(self.direction)


class TextEmbedder:
    """Lookup table mapping caption text to its precomputed embedding."""

    def __init__(self, table: Mapping[str, np.ndarray]):
        if not table:
            raise ValueError("caption table must be non-empty")
        self._table = {cap: as_vector(vec, f"embedding of {cap!r}") for cap, vec in table.items()}
        dims = {v.size for v in self._table.values()}
        if len(dims) != 1:
            raise DimMismatch(f"caption embeddings have mixed dims {sorted(dims)}")
        self.dim = dims.pop()

    def __contains__(self, caption: str) -> bool:
        return caption in self._table

    def embed(self, caption: str) -> np.ndarray:
        try:
            return self._table[caption]
        except KeyError:
            raise MissingCaptionEmbedding(f"no embedding for caption {caption!r}") from None

    @classmethod
    def from_csv(cls, path) -> "TextEmbedder":
        captions, matrix = read_captions_csv(path)
        return cls({cap: matrix[i] for i, cap in enumerate(captions)})


def concept_direction(
    con: str,
    templates: CaptionTemplateSet,
    embed: TextEmbedder,
) -> ConceptDirection:
    """Mean caption embedding for ``con``; raises if the mean degenerates to zero."""
    captions = expand_captions(templates, con)
    vectors = np.stack([embed.embed(c) for c in captions])
    mean = vectors.mean(axis=0)
    if float(np.linalg.norm(mean)) == 0.0:
        raise ZeroMeanVector(f"caption embeddings for {con!r} average to zero")
    return ConceptDirection(con, mean, len(captions))


def direction_table(
    names: Iterable[str],
    templates: CaptionTemplateSet,
    embed: TextEmbedder,
) -> dict[str, ConceptDirection]:
    return {name: concept_direction(name, templates, embed) for name in names}


def zero_shot_scores(img_embedding, class_dirs: Sequence[ConceptDirection]) -> list[float]:
    v = as_vector(img_embedding, "image embedding")
    if float(np.linalg.norm(v)) == 0.0:
        raise ZeroVector("image embedding is zero")
    return [cosine_similarity(v, d.direction) for d in class_dirs]


def zero_shot_classify(
    img_embedding,
    class_dirs: Sequence[ConceptDirection],
    labels: Sequence[ClassLabel] | None = None,
) -> ClassLabel:
    """Class with the highest cosine similarity to the image embedding.

    Ties go to the smallest class index so results are deterministic.
    ``labels`` defaults to the class-direction order.
    """
    if len(class_dirs) < 2:
        raise ValueError("zero-shot classification needs at least 2 class directions")
    if labels is None:
        labels = [ClassLabel(d.concept, i) for i, d in enumerate(class_dirs)]
    if len(labels) != len(class_dirs):
        raise DimMismatch("labels and class directions differ in length")
    scores = zero_shot_scores(img_embedding, class_dirs)
    best = max(range(len(scores)), key=lambda i: (scores[i], -labels[i].index))
    return labels[best]


# --- captions.csv ---------------------------------------------------------------


def write_captions_csv(path, captions: Sequence[str], matrix: np.ndarray) -> None:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.shape[0] != len(captions):
        raise DimMismatch("one embedding row per caption required")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["caption"] + [f"d{i}" for i in range(matrix.shape[1])])
        for cap, row in zip(captions, matrix):
            w.writerow([cap] + [repr(float(x)) for x in row])


def read_captions_csv(path) -> tuple[tuple[str, ...], np.ndarray]:
    path = Path(path)
    with path.open("r", newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if not header or header[0] != "caption" or len(header) < 2:
            raise FormatError(f"{path}: expected header caption,d0,...")
        dim = len(header) - 1
        captions: list[str] = []
        rows: list[list[float]] = []
        for lineno, rec in enumerate(r, start=2):
            if len(rec) != dim + 1:
                raise FormatError(f"{path}:{lineno}: expected {dim + 1} cells")
            captions.append(rec[0])
            try:
                rows.append([float(x) for x in rec[1:]])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
    return tuple(captions), np.array(rows, dtype=np.float64).reshape(len(captions), dim)
