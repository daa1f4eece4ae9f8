"""Embedding matrices, cosine similarity, column statistics, and file formats.

All numerics are float64.  An :class:`EmbeddingSet` is an immutable bundle
of row ids, an ``n x p`` matrix, and optional per-row metadata (ground
truth, predictions, binary concept attributes).

File formats (UTF-8, comma-separated, ``.`` decimal point):

* ``embeddings.csv`` — header ``id,d0,...,d{p-1}``, one row per input.
* ``labels.csv``     — header ``id,ground_truth,predicted`` (``predicted``
  optional; empty cells allowed).
* ``attributes.csv`` — header ``id,<concept1>,...,<conceptK>``, 0/1 cells.
* manifest — JSON ``{dim, class_names[], concept_names[], files{...}}``.

Floats are written with ``repr`` so a save/load round-trip is bit-exact.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DimMismatch,
    EmptySelection,
    FormatError,
    ZeroVector,
)

__all__ = [
    "cosine_similarity",
    "EmbeddingSet",
    "ColumnStats",
    "column_stats",
    "Manifest",
    "load_manifest",
    "write_embeddings_csv",
    "read_embeddings_csv",
    "write_labels_csv",
    "read_labels_csv",
    "write_attributes_csv",
    "read_attributes_csv",
]


def as_vector(v, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise DimMismatch(f"{name} must be a non-empty 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between two nonzero vectors, clamped to [-1, 1].

    1 means parallel, 0 orthogonal, -1 opposite.  The clamp absorbs the
    rounding that can push a self-similarity to 1 + 1e-16.
    """
    va = as_vector(a, "a")
    vb = as_vector(b, "b")
    if va.shape != vb.shape:
        raise DimMismatch(f"dim {va.size} vs {vb.size}")
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine similarity needs nonzero vectors")
    return float(np.clip(float(va @ vb) / (na * nb), -1.0, 1.0))


@dataclass(frozen=True)
class EmbeddingSet:
    """Labeled embedding matrix with optional per-row metadata.

    ``attributes`` maps concept name -> 0/1 array over rows.  Metadata
    columns, when present, cover every row.
    """

    ids: tuple[str, ...]
    matrix: np.ndarray
    ground_truth: tuple[str, ...] | None = None
    predicted: tuple[str, ...] | None = None
    attributes: Mapping[str, np.ndarray] | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != len(self.ids) or m.shape[1] < 1:
            raise DimMismatch(
                f"matrix shape {m.shape} does not match {len(self.ids)} ids"
            )
        if not np.all(np.isfinite(m)):
            raise ValueError("embedding matrix has non-finite entries")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("row ids must be unique")
        for field_name in ("ground_truth", "predicted"):
            col = getattr(self, field_name)
            if col is not None and len(col) != len(self.ids):
                raise DimMismatch(f"{field_name} must cover every row")
        if self.attributes is not None:
            for con, col in self.attributes.items():
                arr = np.asarray(col)
                if arr.shape != (len(self.ids),):
                    raise DimMismatch(f"attribute {con!r} must cover every row")

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def select(self, rows: Sequence[int]) -> "EmbeddingSet":
        """New set restricted to the given row positions (order preserved)."""
        rows = list(rows)
        pick = lambda col: tuple(col[i] for i in rows) if col is not None else None
        attrs = None
        if self.attributes is not None:
            attrs = {c: np.asarray(a)[rows] for c, a in self.attributes.items()}
        return EmbeddingSet(
            ids=tuple(self.ids[i] for i in rows),
            matrix=np.array(self.matrix[rows], dtype=np.float64),
            ground_truth=pick(self.ground_truth),
            predicted=pick(self.predicted),
            attributes=attrs,
        )

    def rows_where_predicted(self, class_name: str) -> list[int]:
        if self.predicted is None:
            raise ValueError("embedding set carries no predictions")
        return [i for i, p in enumerate(self.predicted) if p == class_name]

    def rows_where_truth(self, class_name: str) -> list[int]:
        if self.ground_truth is None:
            raise ValueError("embedding set carries no ground truth")
        return [i for i, g in enumerate(self.ground_truth) if g == class_name]


@dataclass(frozen=True)
class ColumnStats:
    """Per-column mean, population std, min, and max of a row selection."""

    mean: np.ndarray
    std: np.ndarray
    min: np.ndarray
    max: np.ndarray


def column_stats(E: EmbeddingSet, rows: Sequence[int] | None = None) -> ColumnStats:
    """Columnwise statistics over the selected rows (all rows by default).

    The standard deviation is the population one (ddof=0).
    """
    sub = E.matrix if rows is None else E.matrix[list(rows)]
    if sub.shape[0] == 0:
        raise EmptySelection("column_stats over an empty selection")
    return ColumnStats(
        mean=sub.mean(axis=0),
        std=sub.std(axis=0, ddof=0),
        min=sub.min(axis=0),
        max=sub.max(axis=0),
    )


# --- CSV formats ---------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def write_embeddings_csv(path, E: EmbeddingSet) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["id"] + [f"d{i}" for i in range(E.dim)])
        for rid, row in zip(E.ids, E.matrix):
            w.writerow([rid] + [_fmt(x) for x in row])


def read_embeddings_csv(path) -> tuple[tuple[str, ...], np.ndarray]:
    """Read ``embeddings.csv``; returns (ids, matrix)."""
    path = Path(path)
    with path.open("r", newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if not header or header[0] != "id":
            raise FormatError(f"{path}: expected header starting with 'id'")
        dim = len(header) - 1
        if dim < 1 or header[1:] != [f"d{i}" for i in range(dim)]:
            raise FormatError(f"{path}: expected columns d0,...,d{{p-1}}")
        ids: list[str] = []
        rows: list[list[float]] = []
        for lineno, rec in enumerate(r, start=2):
            if len(rec) != dim + 1:
                raise FormatError(f"{path}:{lineno}: expected {dim + 1} cells")
            ids.append(rec[0])
            try:
                rows.append([float(x) for x in rec[1:]])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
    return tuple(ids), np.array(rows, dtype=np.float64).reshape(len(ids), dim)


def write_labels_csv(path, ids, ground_truth, predicted=None) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "ground_truth", "predicted"])
        for i, rid in enumerate(ids):
            pred = predicted[i] if predicted is not None else ""
            w.writerow([rid, ground_truth[i], pred])


def read_labels_csv(path) -> tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...] | None]:
    """Read ``labels.csv``; returns (ids, ground_truth, predicted-or-None)."""
    path = Path(path)
    with path.open("r", newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header is None or header[:2] != ["id", "ground_truth"]:
            raise FormatError(f"{path}: expected header id,ground_truth[,predicted]")
        has_pred = len(header) >= 3 and header[2] == "predicted"
        ids, truth, pred = [], [], []
        for lineno, rec in enumerate(r, start=2):
            if len(rec) < 2:
                raise FormatError(f"{path}:{lineno}: expected at least 2 cells")
            ids.append(rec[0])
            truth.append(rec[1])
            if has_pred:
                pred.append(rec[2] if len(rec) > 2 else "")
    predicted = tuple(pred) if has_pred and any(pred) else None
    return tuple(ids), tuple(truth), predicted


def write_attributes_csv(path, ids, attributes: Mapping[str, np.ndarray]) -> None:
    path = Path(path)
    concepts = list(attributes)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["id"] + concepts)
        for i, rid in enumerate(ids):
            w.writerow([rid] + [str(int(attributes[c][i])) for c in concepts])


def read_attributes_csv(path) -> tuple[tuple[str, ...], dict[str, np.ndarray]]:
    """Read ``attributes.csv``; returns (ids, concept -> 0/1 array)."""
    path = Path(path)
    with path.open("r", newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if not header or header[0] != "id" or len(header) < 2:
            raise FormatError(f"{path}: expected header id,<concept>,...")
        concepts = header[1:]
        ids: list[str] = []
        cols: list[list[int]] = [[] for _ in concepts]
        for lineno, rec in enumerate(r, start=2):
            if len(rec) != len(header):
                raise FormatError(f"{path}:{lineno}: expected {len(header)} cells")
            ids.append(rec[0])
            for k, cell in enumerate(rec[1:]):
                if cell not in ("0", "1"):
                    raise FormatError(f"{path}:{lineno}: attribute cells must be 0 or 1")
                cols[k].append(int(cell))
    table = {c: np.array(col, dtype=np.int64) for c, col in zip(concepts, cols)}
    return tuple(ids), table


# --- manifest --------------------------------------------------------------------


@dataclass(frozen=True)
class Manifest:
    """Project manifest tying together the data files of one task.

    ``files.embeddings`` is either a single path or a ``{"vision": ...,
    "vlm": ...}`` pair when both spaces were exported; ``dim`` mirrors that
    shape.  Optional entries (``head``, ``templates``, ``map``, ``splits``)
    let one manifest drive the whole pipeline.  Paths are resolved relative
    to the manifest's directory.
    """

    dim: dict[str, int]
    class_names: tuple[str, ...]
    concept_names: tuple[str, ...]
    files: dict[str, object]
    base_dir: Path
    splits: dict[str, Path] | None = None

    @property
    def vocabulary(self):
        from .lang import TaskVocabulary

        return TaskVocabulary.make(self.concept_names, self.class_names)

    def path(self, key: str, space: str | None = None) -> Path:
        entry = self.files.get(key)
        if entry is None:
            raise FormatError(f"manifest has no files.{key} entry")
        if isinstance(entry, dict):
            if space is None:
                raise FormatError(f"files.{key} is per-space; pass space='vision' or 'vlm'")
            if space not in entry:
                raise FormatError(f"files.{key} has no {space!r} entry")
            return self.base_dir / str(entry[space])
        return self.base_dir / str(entry)

    def has(self, key: str) -> bool:
        return key in self.files

    def space_dim(self, space: str) -> int:
        if space in self.dim:
            return self.dim[space]
        if "value" in self.dim:
            return self.dim["value"]
        raise FormatError(f"manifest dim does not cover space {space!r}")

    def load_embeddings(self, space: str | None = None) -> EmbeddingSet:
        """Load embeddings plus whatever labels/attributes the manifest lists."""
        entry = self.files.get("embeddings")
        use_space = space
        if isinstance(entry, dict) and space is None:
            raise FormatError("manifest has per-space embeddings; pass space=")
        ids, matrix = read_embeddings_csv(self.path("embeddings", use_space))
        expected = self.space_dim(space or "value")
        if matrix.shape[1] != expected:
            raise FormatError(
                f"embeddings dim {matrix.shape[1]} does not match manifest dim {expected}"
            )
        truth = pred = None
        attrs = None
        if self.has("labels"):
            lids, truth_l, pred_l = read_labels_csv(self.path("labels"))
            if lids != ids:
                raise FormatError("labels.csv ids do not match embeddings.csv ids")
            truth, pred = truth_l, pred_l
        if self.has("attributes"):
            aids, attrs = read_attributes_csv(self.path("attributes"))
            if aids != ids:
                raise FormatError("attributes.csv ids do not match embeddings.csv ids")
            missing = [c for c in attrs if c not in self.concept_names]
            if missing:
                raise FormatError(f"attributes.csv has unknown concepts {missing}")
        return EmbeddingSet(ids, matrix, truth, pred, attrs)

    def split_ids(self, split: str | None) -> set[str] | None:
        if split is None or split == "all":
            return None
        if not self.splits or split not in self.splits:
            raise FormatError(f"manifest defines no split {split!r}")
        text = self.splits[split].read_text(encoding="utf-8")
        return {line.strip() for line in text.splitlines() if line.strip()}


def load_manifest(path) -> Manifest:
    """Load and validate a manifest file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from None
    for key in ("dim", "class_names", "concept_names", "files"):
        if key not in raw:
            raise FormatError(f"{path}: manifest missing {key!r}")
    dim = raw["dim"]
    if isinstance(dim, int):
        dim = {"value": dim}
    elif isinstance(dim, dict) and all(isinstance(v, int) for v in dim.values()):
        dim = dict(dim)
    else:
        raise FormatError(f"{path}: dim must be an int or a space->int mapping")
    classes = tuple(raw["class_names"])
    concepts = tuple(raw["concept_names"])
    if not classes or not concepts:
        raise FormatError(f"{path}: class_names and concept_names must be non-empty")
    base = path.parent
    splits = None
    if "splits" in raw:
        splits = {name: base / str(p) for name, p in raw["splits"].items()}
    return Manifest(
        dim=dim,
        class_names=classes,
        concept_names=concepts,
        files=dict(raw["files"]),
        base_dir=base,
        splits=splits,
    )
