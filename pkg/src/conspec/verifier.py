"""LP-based checking of specifications over box regions.

A specification ``e`` holds over a box when no point in the box violates
it.  The negation of ``e`` is split into conjunctive clauses (one LP per
clause); each LP asks for a point of the box that satisfies the clause
while maximizing a slack ``eps`` on the strength-predicate rows:

* box bounds become variable bounds;
* a ``predict(c)`` literal becomes one dominance inequality per rival
  class (linear head rows, or normalized class directions for the
  zero-shot head);
* a strength literal ``gt(c1, c2)`` (or its negation) becomes a linear
  inequality in the embedding after cancelling the embedding norm from
  both sides of the cosine comparison; all strength rows share ``eps``.

``eps* <= 0`` proves the specification over the region (strict violations
are impossible; equality is a measure-zero boundary), ``eps* > 0`` yields
a concrete counterexample, and when no clause is satisfiable the
specification cannot be violated at all (reported vacuous when that is
because its ``predict`` antecedent never fires inside the region).

Strict inequalities are modeled non-strict throughout: LPs cannot express
strictness, and the boundary has measure zero once degenerate literals
over parallel directions are simplified away (see
:func:`simplify_clause`).

Clauses containing ``!predict(c)`` are first expanded into one clause per
rival class (weak dominance of that rival over all classes), which is
exactly the complement of ``c`` being the unique argmax, up to the shared
boundary.  For clauses with no strength literal the slack is attached to
the dominance rows instead, so a strictly-classified witness still
surfaces as a violation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .directions import ConceptDirection
from .errors import ClauseExplosion, DimMismatch, FormatError, UnsupportedLiteral
from .lang import Clause, ClassLabel, Gt, Literal, Predict, SpecExpr, is_core, to_lp_queries
from .regions import BoxRegion
from .repmap import AffineMap
from .simplex import LinearProgram, LpResult, solve_lp_max

__all__ = [
    "LinearHead",
    "VerificationContext",
    "ClauseReport",
    "VerificationOutcome",
    "encode_vision_query",
    "encode_clip_query",
    "expand_negated_predictions",
    "simplify_clause",
    "verify_spec",
    "save_head_json",
    "load_head_json",
    "write_report_jsonl",
    "write_epsilon_csv",
]

POINT_TOL = 1e-7
TINY_NORM = 1e-9
PARALLEL_TOL = 1e-12


@dataclass(frozen=True)
class LinearHead:
    """Single linear classification layer ``scores = A w + b``."""

    A: np.ndarray
    b: np.ndarray
    classes: tuple[str, ...] | None = None

    def __post_init__(self):
        A = np.asarray(self.A, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        if A.ndim != 2 or b.ndim != 1 or A.shape[0] != b.size:
            raise DimMismatch(f"head A {A.shape} incompatible with b {b.shape}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("head has non-finite parameters")
        if self.classes is not None and len(self.classes) != A.shape[0]:
            raise DimMismatch("one class name per head row required")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def n_classes(self) -> int:
        return self.A.shape[0]

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def scores(self, w) -> np.ndarray:
        return self.A @ np.asarray(w, dtype=np.float64) + self.b


@dataclass(frozen=True)
class VerificationContext:
    """Everything a query needs besides the formula itself.

    Exactly one of ``head`` (vision path, box in the classifier's embedding
    space, optional affine ``map`` into the direction space) or
    ``class_dirs`` (zero-shot path, box in the direction space) must be
    set.  ``solver`` may be swapped for any callable with the
    :func:`conspec.simplex.solve_lp_max` signature.
    """

    box: BoxRegion
    concept_dirs: Mapping[str, ConceptDirection]
    head: LinearHead | None = None
    map: AffineMap | None = None
    class_dirs: Sequence[ConceptDirection] | None = None
    class_labels: Sequence[ClassLabel] | None = None
    max_clauses: int = 64
    solver: Callable[[LinearProgram], LpResult] = solve_lp_max

    def __post_init__(self):
        if (self.head is None) == (self.class_dirs is None):
            raise ValueError("set exactly one of head= or class_dirs=")

    @property
    def n_classes(self) -> int:
        return self.head.n_classes if self.head is not None else len(self.class_dirs)

    def label_for(self, index: int) -> ClassLabel:
        if self.class_labels is not None:
            return self.class_labels[index]
        if self.head is not None and self.head.classes is not None:
            return ClassLabel(self.head.classes[index], index)
        if self.class_dirs is not None:
            return ClassLabel(self.class_dirs[index].concept, index)
        return ClassLabel(f"c{index}", index)


def _unit(d: ConceptDirection) -> np.ndarray:
    return d.unit


def _strength_rows(
    clause: Clause,
    concept_dirs: Mapping[str, ConceptDirection],
) -> list[np.ndarray]:
    """Direction-space coefficient vectors of the shared-slack rows.

    Row ``coeffs`` encodes ``coeffs . z >= eps``: for ``!gt(c1,c2)`` the
    weaker side must win by ``eps`` (``q2 - q1``), for a positive literal
    the stronger side must (``q1 - q2``).
    """
    rows = []
    for lit in clause.literals:
        if not isinstance(lit.atom, Gt):
            continue
        q1 = _unit(concept_dirs[lit.atom.stronger])
        q2 = _unit(concept_dirs[lit.atom.weaker])
        rows.append((q1 - q2) if lit.positive else (q2 - q1))
    return rows


def _predict_rows_vision(label: ClassLabel, head: LinearHead) -> list[tuple[np.ndarray, float]]:
    rows = []
    c = label.index
    for k in range(head.n_classes):
        if k == c:
            continue
        rows.append((head.A[c] - head.A[k], float(head.b[k] - head.b[c])))
    return rows


def _predict_rows_clip(label: ClassLabel, class_dirs: Sequence[ConceptDirection]) -> list[tuple[np.ndarray, float]]:
    c = label.index
    qc = _unit(class_dirs[c])
    rows = []
    for k, dir_k in enumerate(class_dirs):
        if k == c:
            continue
        rows.append((qc - _unit(dir_k), 0.0))
    return rows


def _check_clause_literals(clause: Clause) -> None:
    for lit in clause.literals:
        if isinstance(lit.atom, Predict) and not lit.positive:
            raise UnsupportedLiteral(
                "!predict(c) has no single-LP encoding; expand it first"
            )
        if not isinstance(lit.atom, (Predict, Gt)):
            raise UnsupportedLiteral(f"cannot encode literal {lit}")


def _assemble(
    box: BoxRegion,
    predict_rows: list[tuple[np.ndarray, float]],
    eps_rows: list[tuple[np.ndarray, float]],
) -> LinearProgram:
    """Build the LP over variables ``[x_0..x_{p-1}, eps]`` (eps last).

    ``eps_rows`` entries mean ``coeffs . x - eps >= rhs``; when there are
    none, the slack migrates onto the dominance rows so that feasibility
    is still graded by how strictly the point is classified.
    """
    p = box.dim
    if not eps_rows:
        eps_rows = predict_rows
        predict_rows = []
    lo = np.asarray(box.lower)
    hi = np.asarray(box.upper)
    if not eps_rows:
        # single-class corner: nothing constrains the point, slack pinned at 0
        return LinearProgram(
            lower=np.concatenate([lo, [0.0]]),
            upper=np.concatenate([hi, [0.0]]),
            constraints=(),
            objective=np.concatenate([np.zeros(p), [1.0]]),
        )
    margins_hi = [float(np.sum(np.maximum(a * lo, a * hi))) - r for a, r in eps_rows]
    margins_lo = [float(np.sum(np.minimum(a * lo, a * hi))) - r for a, r in eps_rows]
    eps_hi = min(margins_hi)
    eps_lo = min(margins_lo) - 1.0
    constraints = []
    for a, r in predict_rows:
        constraints.append((np.concatenate([a, [0.0]]), r))
    for a, r in eps_rows:
        constraints.append((np.concatenate([a, [-1.0]]), r))
    objective = np.zeros(p + 1)
    objective[p] = 1.0
    return LinearProgram(
        lower=np.concatenate([lo, [eps_lo]]),
        upper=np.concatenate([hi, [eps_hi]]),
        constraints=tuple(constraints),
        objective=objective,
    )


def encode_vision_query(
    clause: Clause,
    head: LinearHead,
    m: AffineMap | None,
    dirs: Mapping[str, ConceptDirection],
    box: BoxRegion,
) -> LinearProgram:
    """LP over ``[w, eps]`` for one clause against a linear-head classifier.

    The direction-space point is ``z = M w + d`` and is substituted away,
    so the LP stays at ``p + 1`` variables.  ``m=None`` means the
    directions live in the head's own input space (identity map).
    """
    _check_clause_literals(clause)
    if head.dim != box.dim:
        raise DimMismatch(f"head dim {head.dim} vs box dim {box.dim}")
    if m is None:
        m = AffineMap.identity(box.dim)
    if m.p_f != box.dim:
        raise DimMismatch(f"map input dim {m.p_f} vs box dim {box.dim}")
    predict_rows = []
    for lit in clause.literals:
        if isinstance(lit.atom, Predict):
            if lit.atom.label.index >= head.n_classes:
                raise DimMismatch(f"class index {lit.atom.label.index} out of range")
            predict_rows.extend(_predict_rows_vision(lit.atom.label, head))
    eps_rows = []
    for coeffs_z in _strength_rows(clause, dirs):
        if coeffs_z.size != m.p_g:
            raise DimMismatch("concept directions do not match the mapped space")
        a_w = coeffs_z @ m.M
        eps_rows.append((a_w, float(-(coeffs_z @ m.d))))
    return _assemble(box, predict_rows, eps_rows)


def encode_clip_query(
    clause: Clause,
    class_dirs: Sequence[ConceptDirection],
    concept_dirs: Mapping[str, ConceptDirection],
    box: BoxRegion,
) -> LinearProgram:
    """LP over ``[z, eps]`` for one clause against the zero-shot head."""
    _check_clause_literals(clause)
    for d in class_dirs:
        if d.direction.size != box.dim:
            raise DimMismatch("class directions do not match the box dim")
    predict_rows = []
    for lit in clause.literals:
        if isinstance(lit.atom, Predict):
            if lit.atom.label.index >= len(class_dirs):
                raise DimMismatch(f"class index {lit.atom.label.index} out of range")
            predict_rows.extend(_predict_rows_clip(lit.atom.label, class_dirs))
    eps_rows = [(a, 0.0) for a in _strength_rows(clause, concept_dirs)]
    for a, _ in eps_rows:
        if a.size != box.dim:
            raise DimMismatch("concept directions do not match the box dim")
    return _assemble(box, predict_rows, eps_rows)


def expand_negated_predictions(
    clause: Clause,
    ctx: VerificationContext,
) -> list[Clause]:
    """Rewrite each ``!predict(c)`` literal as a case split over rival classes.

    Weak dominance of some rival class is equivalent to ``c`` not being the
    unique argmax, so the union of the returned clauses covers exactly the
    closure of the negated literal.
    """
    out: list[list[Literal]] = [[]]
    for lit in clause.literals:
        if isinstance(lit.atom, Predict) and not lit.positive:
            c = lit.atom.label.index
            rivals = [
                Literal(Predict(ctx.label_for(k)), True)
                for k in range(ctx.n_classes)
                if k != c
            ]
            out = [lits + [riv] for lits in out for riv in rivals]
        else:
            out = [lits + [lit] for lits in out]
        if len(out) > ctx.max_clauses:
            raise ClauseExplosion(
                f"negated-prediction expansion exceeds {ctx.max_clauses} clauses"
            )
    return [Clause(tuple(lits)) for lits in out]


def simplify_clause(clause: Clause, concept_dirs: Mapping[str, ConceptDirection]) -> Clause | None:
    """Resolve strength literals whose two directions are parallel.

    After normalization such a pair has identical strengths everywhere, so
    the strict ``gt`` is never true: a positive literal makes the clause
    unsatisfiable (returns None), a negated one is always true and is
    dropped.  Without this step the boundary set of those literals has
    positive measure and an ``eps* = 0`` result would hide real
    violations.
    """
    kept: list[Literal] = []
    for lit in clause.literals:
        if isinstance(lit.atom, Gt):
            diff = (
                concept_dirs[lit.atom.stronger].unit
                - concept_dirs[lit.atom.weaker].unit
            )
            if float(np.max(np.abs(diff))) <= PARALLEL_TOL:
                if lit.positive:
                    return None
                continue  # negation of a never-true predicate: always holds
        kept.append(lit)
    return Clause(tuple(kept))


@dataclass(frozen=True)
class ClauseReport:
    """Solver outcome for one violation clause."""

    clause: Clause
    status: str  # "optimal", "infeasible", or "unsatisfiable"
    epsilon: float | None
    point: np.ndarray | None
    iterations: int
    tiny_norm: bool = False
    # set when simplification reduced the clause to a tautology: every box
    # point is a violation even though the strength slack is exactly zero
    always_true: bool = False


@dataclass(frozen=True)
class VerificationOutcome:
    """Aggregate verdict over all clauses of a negated specification.

    ``proved`` carries the best margin (max clause eps, <= 0);
    ``counterexample`` carries the witness point and its violation;
    ``vacuous`` means no clause was satisfiable in the region.
    """

    kind: str  # "proved" | "counterexample" | "vacuous"
    epsilon: float | None
    point: np.ndarray | None
    clauses: tuple[ClauseReport, ...]

    @property
    def is_proved(self) -> bool:
        return self.kind == "proved"


def _solve_clause(clause: Clause, ctx: VerificationContext) -> ClauseReport:
    simplified = simplify_clause(clause, ctx.concept_dirs)
    if simplified is None:
        return ClauseReport(clause, "unsatisfiable", None, None, 0)
    if not simplified.literals:
        # only always-true literals: the whole box violates the original spec
        return ClauseReport(
            clause, "optimal", 0.0, ctx.box.midpoint(), 0, always_true=True
        )
    if ctx.head is not None:
        lp = encode_vision_query(simplified, ctx.head, ctx.map, ctx.concept_dirs, ctx.box)
    else:
        lp = encode_clip_query(simplified, ctx.class_dirs, ctx.concept_dirs, ctx.box)
    res = ctx.solver(lp)
    if not res.is_optimal:
        return ClauseReport(clause, "infeasible", None, None, res.iterations)
    point = res.point[:-1]
    eps = float(res.objective)
    _validate_point(simplified, ctx, point, eps)
    z = point if ctx.map is None or ctx.head is None else ctx.map.M @ point + ctx.map.d
    tiny = float(np.linalg.norm(z)) < TINY_NORM
    return ClauseReport(clause, "optimal", eps, point, res.iterations, tiny_norm=tiny)


def _validate_point(clause: Clause, ctx: VerificationContext, point: np.ndarray, eps: float) -> None:
    """Check the solver's witness against the clause it claims to satisfy.

    Strength margins must realize the reported slack.  Classification
    dominance is a hard constraint on mixed clauses; on clauses without
    strength literals it is itself the slacked quantity.
    """
    if not ctx.box.contains(point, atol=POINT_TOL):
        raise AssertionError("solver returned a point outside the box")
    if ctx.head is not None:
        m = ctx.map if ctx.map is not None else AffineMap.identity(ctx.box.dim)
        z = m.M @ point + m.d
        scores = ctx.head.scores(point)
    else:
        z = point
        scores = np.array([_unit(d) @ z for d in ctx.class_dirs])
    strength: list[float] = []
    dominance: list[float] = []
    for lit in clause.literals:
        if isinstance(lit.atom, Predict) and lit.positive:
            c = lit.atom.label.index
            others = np.delete(scores, c)
            if others.size:
                dominance.append(float(scores[c] - others.max()))
        elif isinstance(lit.atom, Gt):
            q1 = _unit(ctx.concept_dirs[lit.atom.stronger])
            q2 = _unit(ctx.concept_dirs[lit.atom.weaker])
            coeffs = (q1 - q2) if lit.positive else (q2 - q1)
            strength.append(float(coeffs @ z))
    slacked = strength if strength else dominance
    if strength and dominance and min(dominance) < -POINT_TOL:
        raise AssertionError("witness violates a classification constraint")
    if slacked and abs(min(slacked) - eps) > POINT_TOL:
        raise AssertionError("witness does not achieve the reported violation")


def verify_spec(e: SpecExpr, context: VerificationContext) -> VerificationOutcome:
    """Check a desugared specification over the context's box region.

    Solves one LP per violation clause.  Any clause with positive slack
    gives a counterexample (the max-slack witness is reported); otherwise
    satisfiable clauses prove the specification with their best slack as
    the margin.  When every clause is unsatisfiable the specification
    cannot be violated at all: that is reported as ``vacuous`` when the
    unsatisfiability comes from positive ``predict`` literals (the
    antecedent never fires in the region) and as ``proved`` (without a
    margin) otherwise.
    """
    if not is_core(e):
        raise ValueError("verify_spec needs a desugared specification")
    reports: list[ClauseReport] = []
    all_vacuous_flavor = True
    for clause in to_lp_queries(e, context.max_clauses):
        expansions = expand_negated_predictions(clause, context)
        solved = [_solve_clause(expanded, context) for expanded in expansions]
        reports.extend(solved)
        if all(r.status != "optimal" for r in solved):
            # slack rows are always satisfiable, so LP infeasibility is owned
            # by the clause's own positive predict literals (antecedent-like);
            # synthesized rival-dominance clauses falling infeasible, or
            # clauses killed by a never-true strength literal, instead mean
            # the violation scenario itself is impossible
            has_positive_predict = any(
                isinstance(lit.atom, Predict) and lit.positive
                for lit in clause.literals
            )
            lp_infeasible = any(r.status == "infeasible" for r in solved)
            if not (has_positive_predict and lp_infeasible):
                all_vacuous_flavor = False
    feasible = [r for r in reports if r.status == "optimal"]
    if not feasible:
        kind = "vacuous" if all_vacuous_flavor else "proved"
        return VerificationOutcome(kind, None, None, tuple(reports))
    best = max(
        feasible, key=lambda r: (r.epsilon if not r.always_true else np.inf)
    )
    violated = best.epsilon > 0.0 or best.always_true
    kind = "counterexample" if violated else "proved"
    return VerificationOutcome(kind, best.epsilon, best.point, tuple(reports))


# --- head.json and reports -----------------------------------------------------


def save_head_json(path, head: LinearHead) -> None:
    payload = {
        "A": [[float(x) for x in row] for row in head.A],
        "b": [float(x) for x in head.b],
        "classes": list(head.classes) if head.classes else None,
    }
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_head_json(path) -> LinearHead:
    path = Path(path)
    raw = json.loads(path.read_text(encoding="utf-8"))
    for key in ("A", "b"):
        if key not in raw:
            raise FormatError(f"{path}: head file missing {key!r}")
    classes = tuple(raw["classes"]) if raw.get("classes") else None
    return LinearHead(
        A=np.array(raw["A"], dtype=np.float64),
        b=np.array(raw["b"], dtype=np.float64),
        classes=classes,
    )


def outcome_record(
    spec_text: str,
    region: BoxRegion,
    outcome: VerificationOutcome,
    solve_ms: float,
    deterministic: bool = False,
) -> dict:
    rec = {
        "spec_text": spec_text,
        "region_provenance": region.tag(),
        "outcome": outcome.kind,
        "epsilon": outcome.epsilon,
        "solve_ms": 0.0 if deterministic else round(solve_ms, 3),
    }
    if outcome.point is not None:
        rec["point"] = [float(x) for x in outcome.point]
    return rec


def write_report_jsonl(path, records: Sequence[dict]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def write_epsilon_csv(path, records: Sequence[dict]) -> None:
    """Plot data: one line per (spec index, region) with its violation slack."""
    import csv as _csv

    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = _csv.writer(fh)
        w.writerow(["spec_index", "region", "epsilon"])
        for i, rec in enumerate(records):
            eps = rec.get("epsilon")
            w.writerow([i, rec["region_provenance"], "" if eps is None else repr(eps)])
