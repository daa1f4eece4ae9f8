"""Focus regions: axis-aligned boxes approximating in-distribution embeddings.

Four constructions, all per class ``c``:

* ``A1`` — min/max hull of embeddings the model *predicts* as ``c``.
* ``A2`` — hull restricted to rows that are also correctly labeled ``c``
  (always contained in A1).
* ``A3`` — one hull per cell of a row partition of the predicted-``c``
  rows; partitions normally come from an external precondition-extraction
  tool via ``partition.csv``, with a built-in variance/sign surrogate for
  self-contained demos.
* ``gamma`` — box centered at the per-column mean of ground-truth-``c``
  rows with half-width ``gamma * std``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .embeddings import ColumnStats, EmbeddingSet, column_stats
from .errors import DimMismatch, EmptyClassSelection, FormatError, UncoveredRow

__all__ = [
    "BoxRegion",
    "RegionPartition",
    "region_a1",
    "region_a2",
    "region_a3",
    "region_gamma",
    "surrogate_partition",
    "write_regions_json",
    "read_regions_json",
    "write_partition_csv",
    "read_partition_csv",
]


@dataclass(frozen=True)
class BoxRegion:
    """Axis-aligned box ``[lower_i, upper_i]`` with a provenance tag.

    ``provenance`` is one of ``A1``, ``A2``, ``A3`` (with ``cell`` set) or
    ``gamma`` (with ``gamma`` set).
    """

    lower: np.ndarray
    upper: np.ndarray
    provenance: str
    class_name: str | None = None
    cell: str | None = None
    gamma: float | None = None

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=np.float64)
        hi = np.asarray(self.upper, dtype=np.float64)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DimMismatch("box bounds must be 1-D vectors of equal dim")
        if np.any(lo > hi):
            raise ValueError("box has lower > upper")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    def contains(self, v, atol: float = 0.0) -> bool:
        v = np.asarray(v, dtype=np.float64)
        return bool(np.all(v >= self.lower - atol) and np.all(v <= self.upper + atol))

    def contains_box(self, other: "BoxRegion") -> bool:
        return bool(np.all(self.lower <= other.lower) and np.all(other.upper <= self.upper))

    def midpoint(self) -> np.ndarray:
        return (self.lower + self.upper) / 2.0

    def tag(self) -> str:
        if self.provenance == "A3" and self.cell is not None:
            return f"A3[{self.cell}]"
        if self.provenance == "gamma" and self.gamma is not None:
            return f"gamma[{self.gamma:g}]"
        return self.provenance


def _hull(E: EmbeddingSet, rows: Sequence[int], provenance: str, class_name: str, **kw) -> BoxRegion:
    stats = column_stats(E, rows)
    return BoxRegion(stats.min, stats.max, provenance, class_name=class_name, **kw)


def region_a1(E: EmbeddingSet, c: str) -> BoxRegion:
    """Hull of embeddings predicted as class ``c``."""
    rows = E.rows_where_predicted(c)
    if not rows:
        raise EmptyClassSelection(f"no rows predicted as {c!r}")
    return _hull(E, rows, "A1", c)


def region_a2(E: EmbeddingSet, c: str) -> BoxRegion:
    """Hull of embeddings both predicted and ground-truth labeled ``c``."""
    if E.ground_truth is None:
        raise ValueError("A2 needs ground-truth labels")
    rows = [i for i in E.rows_where_predicted(c) if E.ground_truth[i] == c]
    if not rows:
        raise EmptyClassSelection(f"no correctly classified rows for {c!r}")
    return _hull(E, rows, "A2", c)


@dataclass(frozen=True)
class RegionPartition:
    """Assignment of row ids to named partition cells."""

    assignment: Mapping[str, str]

    def cells(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for rid, cell in self.assignment.items():
            out.setdefault(cell, []).append(rid)
        return out


def region_a3(E: EmbeddingSet, c: str, part: RegionPartition) -> list[BoxRegion]:
    """One hull per partition cell over the rows predicted as ``c``.

    Every predicted-``c`` row must be covered by the partition; singleton
    cells produce degenerate boxes with lower == upper.
    """
    rows = E.rows_where_predicted(c)
    if not rows:
        raise EmptyClassSelection(f"no rows predicted as {c!r}")
    cell_rows: dict[str, list[int]] = {}
    for i in rows:
        rid = E.ids[i]
        cell = part.assignment.get(rid)
        if cell is None:
            raise UncoveredRow(f"partition does not cover row {rid!r}")
        cell_rows.setdefault(cell, []).append(i)
    return [
        _hull(E, cell_rows[cell], "A3", c, cell=cell)
        for cell in sorted(cell_rows)
    ]


def region_gamma(E: EmbeddingSet, c: str, gamma: float) -> BoxRegion:
    """Mean +/- gamma*std box over ground-truth-``c`` rows (population std)."""
    if gamma <= 0:
        raise ValueError("gamma must be > 0")
    rows = E.rows_where_truth(c)
    if not rows:
        raise EmptyClassSelection(f"no ground-truth rows for {c!r}")
    stats: ColumnStats = column_stats(E, rows)
    return BoxRegion(
        stats.mean - gamma * stats.std,
        stats.mean + gamma * stats.std,
        "gamma",
        class_name=c,
        gamma=float(gamma),
    )


def surrogate_partition(E: EmbeddingSet, rows: Sequence[int], k: int = 3) -> RegionPartition:
    """Toy stand-in for precondition extraction: group rows by the sign
    pattern of their top-``k``-variance coordinates (relative to the mean
    of the selected rows)."""
    rows = list(rows)
    if not rows:
        raise EmptyClassSelection("surrogate partition over no rows")
    sub = E.matrix[rows]
    variances = sub.var(axis=0)
    k = min(k, sub.shape[1])
    top = np.argsort(-variances, kind="stable")[:k]
    center = sub.mean(axis=0)
    assignment = {}
    for local, i in enumerate(rows):
        bits = "".join("+" if sub[local, j] >= center[j] else "-" for j in top)
        assignment[E.ids[i]] = bits
    return RegionPartition(assignment)


# --- regions.json / partition.csv ---------------------------------------------------


def write_regions_json(path, regions: Sequence[BoxRegion]) -> None:
    payload = []
    for r in regions:
        rec = {
            "provenance": r.provenance,
            "class": r.class_name,
            "lower": [float(x) for x in r.lower],
            "upper": [float(x) for x in r.upper],
        }
        if r.cell is not None:
            rec["cell"] = r.cell
        if r.gamma is not None:
            rec["gamma"] = r.gamma
        payload.append(rec)
    Path(path).write_text(json.dumps(payload, indent=2), encoding="utf-8")


def read_regions_json(path) -> list[BoxRegion]:
    path = Path(path)
    raw = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(raw, list):
        raise FormatError(f"{path}: expected a JSON list of regions")
    out = []
    for rec in raw:
        try:
            out.append(
                BoxRegion(
                    lower=np.array(rec["lower"], dtype=np.float64),
                    upper=np.array(rec["upper"], dtype=np.float64),
                    provenance=rec["provenance"],
                    class_name=rec.get("class"),
                    cell=rec.get("cell"),
                    gamma=rec.get("gamma"),
                )
            )
        except KeyError as exc:
            raise FormatError(f"{path}: region record missing {exc.args[0]!r}") from None
    return out


def write_partition_csv(path, part: RegionPartition) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "cell"])
        for rid, cell in part.assignment.items():
            w.writerow([rid, cell])


def read_partition_csv(path) -> RegionPartition:
    path = Path(path)
    with path.open("r", newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header != ["id", "cell"]:
            raise FormatError(f"{path}: expected header id,cell")
        assignment = {}
        for lineno, rec in enumerate(r, start=2):
            if len(rec) != 2:
                raise FormatError(f"{path}:{lineno}: expected 2 cells")
            assignment[rec[0]] = rec[1]
    return RegionPartition(assignment)
