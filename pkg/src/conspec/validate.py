"""Relevant-concept extraction, predicate elicitation, and satisfaction rates.

For a class ``c``, a concept is *relevant* when its annotation rate among
ground-truth-``c`` rows strictly exceeds a threshold (default 70%).  Each
(relevant, irrelevant) pair yields a strength predicate ``relevant >
irrelevant`` expected to hold on class-``c`` inputs.  The satisfaction
probability of a predicate is the fraction of class-``c`` rows whose
concept strengths actually order that way; predicates whose rate on the
train split strictly exceeds a significance level (default 95%) graduate
to verification.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .embeddings import EmbeddingSet
from .errors import FormatError, NoRowsForClass
from .repmap import RepMap, rep_values

__all__ = [
    "StrengthPredicate",
    "PredicateStat",
    "ValidationReport",
    "relevant_concepts",
    "elicit_predicates",
    "satisfaction_probability",
    "filter_significant",
    "write_report_csv",
    "read_report_csv",
    "heatmap_grid",
]

RELEVANCE_THRESHOLD = 0.70
SIGNIFICANCE_LEVEL = 0.95


@dataclass(frozen=True)
class StrengthPredicate:
    """``stronger > weaker``, expected on inputs of ``for_class``."""

    stronger: str
    weaker: str
    for_class: str

    def __post_init__(self):
        if self.stronger == self.weaker:
            raise ValueError("strength predicate needs two distinct concepts")

    def spec_text(self) -> str:
        return f"predict({self.for_class}) => gt({self.stronger}, {self.weaker})"


@dataclass(frozen=True)
class PredicateStat:
    predicate: StrengthPredicate
    satisfied: int
    total: int

    @property
    def probability(self) -> float:
        return self.satisfied / self.total


@dataclass(frozen=True)
class ValidationReport:
    """Satisfaction rates for a batch of predicates on one split."""

    class_name: str
    entries: tuple[PredicateStat, ...]
    split: str | None = None

    def probability(self, pred: StrengthPredicate) -> float:
        for entry in self.entries:
            if entry.predicate == pred:
                return entry.probability
        raise KeyError(pred)


def relevant_concepts(
    E: EmbeddingSet,
    c: str,
    threshold: float = RELEVANCE_THRESHOLD,
) -> set[str]:
    """Concepts annotated on strictly more than ``threshold`` of the
    ground-truth-``c`` rows."""
    if E.ground_truth is None or E.attributes is None:
        raise ValueError("relevance extraction needs ground truth and attributes")
    rows = E.rows_where_truth(c)
    if not rows:
        raise NoRowsForClass(f"no ground-truth rows for class {c!r}")
    out = set()
    for con, col in E.attributes.items():
        rate = sum(int(col[i]) for i in rows) / len(rows)
        if rate > threshold:
            out.add(con)
    return out


def elicit_predicates(
    relevant: Iterable[str],
    all_concepts: Sequence[str],
    c: str,
) -> list[StrengthPredicate]:
    """Cross product of relevant and irrelevant concepts, in vocabulary order."""
    relevant = set(relevant)
    unknown = relevant - set(all_concepts)
    if unknown:
        raise ValueError(f"relevant concepts not in the vocabulary: {sorted(unknown)}")
    rel_ordered = [con for con in all_concepts if con in relevant]
    irr_ordered = [con for con in all_concepts if con not in relevant]
    return [
        StrengthPredicate(stronger=r, weaker=ir, for_class=c)
        for r in rel_ordered
        for ir in irr_ordered
    ]


def satisfaction_probability(
    E: EmbeddingSet,
    preds: Sequence[StrengthPredicate],
    r: RepMap,
    c: str,
    split: str | None = None,
    jobs: int = 1,
) -> ValidationReport:
    """Per-predicate fraction of ground-truth-``c`` rows with
    ``rep(stronger) > rep(weaker)`` (strict).

    Rows must carry embeddings in the space matching ``r``'s mode.
    Predicates are independent, so ``jobs > 1`` counts them in a thread
    pool over one shared strength table; results keep input order.
    """
    rows = E.rows_where_truth(c)
    if not rows:
        raise NoRowsForClass(f"no ground-truth rows for class {c!r}")
    concepts = sorted({p.stronger for p in preds} | {p.weaker for p in preds})
    strengths = [rep_values(r, concepts, E.matrix[i]) for i in rows]

    def count(pred: StrengthPredicate) -> PredicateStat:
        satisfied = sum(1 for s in strengths if s[pred.stronger] > s[pred.weaker])
        return PredicateStat(pred, satisfied, len(rows))

    if jobs > 1 and len(preds) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            entries = tuple(pool.map(count, preds))
    else:
        entries = tuple(count(p) for p in preds)
    return ValidationReport(class_name=c, entries=entries, split=split)


def filter_significant(
    report: ValidationReport,
    level: float = SIGNIFICANCE_LEVEL,
    split: str = "train",
) -> list[StrengthPredicate]:
    """Predicates with satisfaction probability strictly above ``level``.

    Meant to run on a report computed over the train split (``split``
    records that intent; it is not enforced).
    """
    return [e.predicate for e in report.entries if e.probability > level]


# --- report.csv and plot data ----------------------------------------------------


def write_report_csv(path, report: ValidationReport) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["class", "stronger", "weaker", "probability", "n"])
        for e in report.entries:
            w.writerow(
                [
                    report.class_name,
                    e.predicate.stronger,
                    e.predicate.weaker,
                    repr(e.probability),
                    e.total,
                ]
            )


def read_report_csv(path) -> ValidationReport:
    path = Path(path)
    with path.open("r", newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header != ["class", "stronger", "weaker", "probability", "n"]:
            raise FormatError(f"{path}: unexpected report header {header}")
        entries = []
        class_name = None
        for lineno, rec in enumerate(r, start=2):
            if len(rec) != 5:
                raise FormatError(f"{path}:{lineno}: expected 5 cells")
            class_name = rec[0]
            total = int(rec[4])
            prob = float(rec[3])
            satisfied = round(prob * total)
            entries.append(
                PredicateStat(
                    StrengthPredicate(rec[1], rec[2], rec[0]), satisfied, total
                )
            )
    if class_name is None:
        raise FormatError(f"{path}: report has no rows")
    return ValidationReport(class_name=class_name, entries=tuple(entries))


def heatmap_grid(report: ValidationReport, relevant: Iterable[str] | None = None) -> dict:
    """Plot data mirroring the satisfaction heat maps: rows are the
    stronger concepts, columns the weaker ones.

    Cells without an evaluated predicate are null.  When ``relevant`` is
    given, pairs where neither side is relevant are categorized
    ``nonsensical`` (still reported, never filtered).
    """
    relevant = set(relevant) if relevant is not None else None
    y = sorted({e.predicate.stronger for e in report.entries})
    x = sorted({e.predicate.weaker for e in report.entries})
    prob = [[None] * len(x) for _ in y]
    cat = [[None] * len(x) for _ in y]
    lookup = {(e.predicate.stronger, e.predicate.weaker): e for e in report.entries}
    for i, stronger in enumerate(y):
        for j, weaker in enumerate(x):
            e = lookup.get((stronger, weaker))
            if e is None:
                continue
            prob[i][j] = e.probability
            if relevant is not None and stronger not in relevant and weaker not in relevant:
                cat[i][j] = "nonsensical"
            else:
                cat[i][j] = "evaluated"
    return {
        "class": report.class_name,
        "y": y,
        "x": x,
        "probability": prob,
        "category": cat,
    }


def write_heatmap_json(path, report: ValidationReport, relevant=None) -> None:
    Path(path).write_text(json.dumps(heatmap_grid(report, relevant), indent=2), "utf-8")
