"""Independent brute-force oracles for auditing the evaluator and the LPs.

These deliberately avoid the solver and encoder code paths: satisfaction
is checked by enumerating a finite scope, and violation slacks are checked
by dense grid search.  They ship with the library (not just the tests) so
verification results on small projections can be audited by hand.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import GridTooLarge, MissingPoint
from .lang import Clause, Gt, Predict, SpecExpr, evaluate
from .regions import BoxRegion
from .repmap import RepMap, rep_values
from .verifier import VerificationContext

__all__ = [
    "FiniteScope",
    "brute_force_satisfaction",
    "reduction_check",
    "GridOutcome",
    "grid_violation_oracle",
]

GRID_BUDGET = 10_000_000

Point = tuple[float, ...]


@dataclass(frozen=True)
class FiniteScope:
    """Explicit list of inputs standing in for the quantified scope."""

    points: tuple[Point, ...]

    def __post_init__(self):
        if not self.points:
            raise ValueError("scope must be non-empty")
        dims = {len(p) for p in self.points}
        if len(dims) != 1:
            raise ValueError("scope points must share one dimension")


def brute_force_satisfaction(
    e: SpecExpr,
    classifier_table: Mapping[Point, Sequence[float]],
    rep_table: Mapping[Point, Mapping[str, float]],
    scope: FiniteScope,
) -> bool:
    """True iff ``e`` evaluates true at every scope point (tables as models)."""
    for pt in scope.points:
        if pt not in classifier_table or pt not in rep_table:
            raise MissingPoint(f"tables undefined at {pt}")
        if not evaluate(e, classifier_table[pt], rep_table[pt]):
            return False
    return True


def reduction_check(
    e: SpecExpr,
    encoder: Mapping[Point, Point],
    head: Callable[[Point], Sequence[float]],
    rep: RepMap,
    scope: FiniteScope,
    concepts: Sequence[str],
) -> bool:
    """Input-space satisfaction agrees with embedding-space satisfaction.

    The classifier is ``head(encoder(v))`` and concept strengths are
    computed from the embedding, so quantifying over the encoded scope
    (as a set; encoders may collide) must answer exactly like quantifying
    over the inputs.  Any ``False`` from this check is an implementation
    defect, not a property of the models.
    """
    def holds_at(embedding: Point) -> bool:
        scores = head(embedding)
        reps = rep_values(rep, concepts, np.array(embedding))
        return evaluate(e, scores, reps)

    input_side = True
    for v in scope.points:
        if v not in encoder:
            raise MissingPoint(f"encoder undefined at {v}")
        if not holds_at(encoder[v]):
            input_side = False
            break

    embedded = {encoder[v] for v in scope.points}
    embedding_side = all(holds_at(z) for z in embedded)
    return input_side == embedding_side


# --- grid search over boxes -------------------------------------------------------


@dataclass(frozen=True)
class GridOutcome:
    status: str  # "optimal" or "infeasible"
    epsilon: float | None
    point: np.ndarray | None
    points_checked: int


def _axis(lo: float, hi: float, step: float, extra: float | None = None) -> np.ndarray:
    if hi <= lo:
        vals = np.array([lo])
    else:
        count = int(np.ceil((hi - lo) / step)) + 1
        vals = np.linspace(lo, hi, count)
    if extra is not None and lo <= extra <= hi:
        vals = np.unique(np.append(vals, extra))
    return vals


def _point_margins(clause: Clause, ctx: VerificationContext, X: np.ndarray):
    """Feasibility mask and slack per row of ``X`` under closed semantics.

    Strength rows share the slack; positive predictions must weakly
    dominate; a negated prediction holds where its best rival weakly
    dominates everything.  Mirrors the LP conventions by construction, but
    computes them pointwise.
    """
    if ctx.head is not None:
        scores = X @ ctx.head.A.T + ctx.head.b
        Z = X if ctx.map is None else X @ ctx.map.M.T + ctx.map.d
    else:
        Z = X
        scores = X @ np.stack([d.unit for d in ctx.class_dirs]).T

    n = X.shape[0]
    strength = []
    dominance = []
    for lit in clause.literals:
        if isinstance(lit.atom, Gt):
            q1 = ctx.concept_dirs[lit.atom.stronger].unit
            q2 = ctx.concept_dirs[lit.atom.weaker].unit
            margin = Z @ (q1 - q2)
            strength.append(margin if lit.positive else -margin)
        elif isinstance(lit.atom, Predict):
            c = lit.atom.label.index
            k_classes = scores.shape[1]
            if lit.positive:
                rivals = np.delete(scores, c, axis=1)
                dominance.append(
                    scores[:, [c]].ravel() - rivals.max(axis=1)
                    if rivals.size
                    else np.zeros(n)
                )
            else:
                best = np.full(n, -np.inf)
                for k in range(k_classes):
                    if k == c:
                        continue
                    others = np.delete(scores, k, axis=1)
                    margin_k = (
                        scores[:, k] - others.max(axis=1) if others.size else np.zeros(n)
                    )
                    best = np.maximum(best, margin_k)
                dominance.append(best)
    feasible = np.ones(n, dtype=bool)
    for d in dominance:
        feasible &= d >= 0.0
    if strength:
        eps = np.min(np.stack(strength), axis=0)
    elif dominance:
        eps = np.min(np.stack(dominance), axis=0)
    else:
        eps = np.zeros(n)
    return feasible, eps


def grid_violation_oracle(
    clause: Clause,
    ctx: VerificationContext,
    box: BoxRegion | None = None,
    step: float = 0.01,
    dims: Sequence[int] | None = None,
    anchor: np.ndarray | None = None,
) -> GridOutcome:
    """Maximize the clause slack by dense grid search.

    The grid spans the box with spacing at most ``step`` per coordinate,
    endpoints included.  ``dims`` restricts the search to a projection:
    the remaining coordinates stay fixed at ``anchor`` (default: box
    midpoint) and the anchor's own coordinates join the grid, so an
    anchored audit always re-evaluates the anchor itself.  Raises
    :class:`GridTooLarge` beyond 1e7 points.
    """
    box = box or ctx.box
    p = box.dim
    active = list(range(p)) if dims is None else list(dims)
    base = box.midpoint() if anchor is None else np.asarray(anchor, dtype=np.float64)
    axes = [
        _axis(
            float(box.lower[i]),
            float(box.upper[i]),
            step,
            extra=float(base[i]) if anchor is not None else None,
        )
        for i in active
    ]
    total = 1
    for ax in axes:
        total *= len(ax)
        if total > GRID_BUDGET:
            raise GridTooLarge(f"grid would exceed {GRID_BUDGET} points")

    best_eps = None
    best_point = None
    chunk = 262_144
    for start in range(0, total, chunk):
        count = min(chunk, total - start)
        flat = np.arange(start, start + count)
        X = np.tile(base, (count, 1))
        rem = flat
        for k in range(len(active) - 1, -1, -1):
            ax = axes[k]
            X[:, active[k]] = ax[rem % len(ax)]
            rem = rem // len(ax)
        feasible, eps = _point_margins(clause, ctx, X)
        if feasible.any():
            eps_masked = np.where(feasible, eps, -np.inf)
            i = int(np.argmax(eps_masked))
            if best_eps is None or eps_masked[i] > best_eps:
                best_eps = float(eps_masked[i])
                best_point = X[i].copy()
    if best_eps is None:
        return GridOutcome("infeasible", None, None, total)
    return GridOutcome("optimal", best_eps, best_point, total)
