"""Self-contained bounded-variable primal simplex.

Solves ``maximize c.x  subject to  A x >= b,  l <= x <= u`` with finite
bounds on every variable, which keeps the feasible set compact.  Two
phases (artificial variables drive feasibility first), Bland's smallest-
index anti-cycling rule, pivot tolerance 1e-9.  The implementation is
deterministic: identical inputs produce identical pivots and results.

The verifier's queries are small (a few hundred variables, a few dozen
rows), so each iteration simply re-solves the basis system densely instead
of maintaining a factorization.

``solve_lp_max`` is the entry point; anything with the same signature can
be swapped in as the solver backend.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .errors import DimMismatch, NumericalBreakdown

__all__ = ["LinearProgram", "LpResult", "solve_lp_max"]

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7


@dataclass(frozen=True)
class LinearProgram:
    """``maximize objective . x`` over ``A x >= b`` within finite bounds."""

    lower: np.ndarray
    upper: np.ndarray
    constraints: tuple[tuple[np.ndarray, float], ...]
    objective: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=np.float64)
        hi = np.asarray(self.upper, dtype=np.float64)
        c = np.asarray(self.objective, dtype=np.float64)
        if lo.ndim != 1 or lo.shape != hi.shape or c.shape != lo.shape:
            raise DimMismatch("bounds and objective must share one dimension")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(np.isfinite(c))):
            raise ValueError("bounds and objective must be finite")
        if np.any(lo > hi):
            raise ValueError("lower bound exceeds upper bound")
        rows = []
        for coeffs, rhs in self.constraints:
            a = np.asarray(coeffs, dtype=np.float64)
            if a.shape != lo.shape:
                raise DimMismatch("constraint coefficients must match variable count")
            if not (np.all(np.isfinite(a)) and np.isfinite(rhs)):
                raise ValueError("constraints must be finite")
            rows.append((a, float(rhs)))
        object.__setattr__(self, "constraints", tuple(rows))
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "objective", c)

    @property
    def n_vars(self) -> int:
        return self.lower.size


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal" or "infeasible"
    objective: float | None
    point: np.ndarray | None
    iterations: int

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    """Bounded-variable simplex state over structural+surplus(+artificial) columns."""

    def __init__(self, lp: LinearProgram):
        n = lp.n_vars
        m = len(lp.constraints)
        self.n_struct = n
        self.m = m
        if m:
            A = np.stack([a for a, _ in lp.constraints])
            b = np.array([rhs for _, rhs in lp.constraints])
        else:
            A = np.zeros((0, n))
            b = np.zeros(0)
        # columns: structural | surplus (A x - s = b)
        self.A = np.hstack([A, -np.eye(m)]) if m else A
        self.b = b
        big = 1e30
        self.lower = np.concatenate([lp.lower, np.zeros(m)])
        self.upper = np.concatenate([lp.upper, np.full(m, big)])
        self.n_total = n + m
        self.iterations = 0

    def add_artificials(self, residual: np.ndarray) -> None:
        m = self.m
        cols = np.zeros((m, m))
        for i, r in enumerate(residual):
            cols[i, i] = 1.0 if r >= 0 else -1.0
        self.A = np.hstack([self.A, cols])
        self.lower = np.concatenate([self.lower, np.zeros(m)])
        self.upper = np.concatenate([self.upper, np.full(m, 1e30)])
        self.artificial_start = self.n_total
        self.n_total += m

    def freeze(self, j: int) -> None:
        self.lower[j] = 0.0
        self.upper[j] = 0.0


def _basic_values(T: _Tableau, basis: list[int], nb_value: np.ndarray) -> np.ndarray:
    if T.m == 0:
        return np.zeros(0)
    B = T.A[:, basis]
    mask = np.ones(T.n_total, dtype=bool)
    mask[basis] = False
    rhs = T.b - T.A[:, mask] @ nb_value[mask]
    return np.linalg.solve(B, rhs)


def _iterate(
    T: _Tableau,
    basis: list[int],
    at_upper: np.ndarray,
    cost: np.ndarray,
    max_iter: int,
) -> np.ndarray:
    """Run simplex to optimality for the given cost; returns the full point."""
    m = T.m
    x = np.where(at_upper, T.upper, T.lower)
    for _ in range(max_iter):
        T.iterations += 1
        if m:
            x_B = _basic_values(T, basis, x)
            for pos, j in enumerate(basis):
                x[j] = x_B[pos]
            B = T.A[:, basis]
            y = np.linalg.solve(B.T, cost[basis])
            reduced = cost - y @ T.A
        else:
            reduced = cost.copy()

        in_basis = np.zeros(T.n_total, dtype=bool)
        in_basis[basis] = True
        entering = -1
        for j in range(T.n_total):
            if in_basis[j] or T.upper[j] - T.lower[j] <= PIVOT_TOL:
                continue
            if not at_upper[j] and reduced[j] > PIVOT_TOL:
                entering = j
                break
            if at_upper[j] and reduced[j] < -PIVOT_TOL:
                entering = j
                break
        if entering < 0:
            return x

        sigma = -1.0 if at_upper[entering] else 1.0
        d = np.linalg.solve(T.A[:, basis], T.A[:, entering]) if m else np.zeros(0)

        # candidates: (t, variable index, basis position or -1 for a bound flip)
        best_t = T.upper[entering] - T.lower[entering]
        best_idx = entering
        best_pos = -1
        best_hit_upper = False
        for pos, jb in enumerate(basis):
            delta = sigma * d[pos]
            if delta > PIVOT_TOL:
                t = max((x[jb] - T.lower[jb]) / delta, 0.0)
                hit_upper = False
            elif delta < -PIVOT_TOL:
                t = max((T.upper[jb] - x[jb]) / (-delta), 0.0)
                hit_upper = True
            else:
                continue
            if t < best_t - PIVOT_TOL or (t < best_t + PIVOT_TOL and jb < best_idx):
                best_t, best_idx, best_pos = t, jb, pos
                best_hit_upper = hit_upper
        if best_t >= 1e29:
            raise NumericalBreakdown("unbounded improving direction")

        if best_pos < 0:
            # bound flip: entering variable crosses to its other bound
            at_upper[entering] = not at_upper[entering]
            x[entering] = T.upper[entering] if at_upper[entering] else T.lower[entering]
            continue

        leaving = basis[best_pos]
        x[entering] = (
            T.lower[entering] + best_t if sigma > 0 else T.upper[entering] - best_t
        )
        x[leaving] = T.upper[leaving] if best_hit_upper else T.lower[leaving]
        at_upper[leaving] = best_hit_upper
        at_upper[entering] = False  # basic; flag unused until it leaves
        basis[best_pos] = entering
    raise NumericalBreakdown("iteration limit reached")


def solve_lp_max(lp: LinearProgram, max_iter: int | None = None) -> LpResult:
    """Maximize the objective; status ``optimal`` or ``infeasible``.

    Raises :class:`NumericalBreakdown` if no usable pivot exists before
    optimality (tolerance 1e-9) or the iteration budget is exhausted.
    """
    T = _Tableau(lp)
    n, m = T.n_struct, T.m
    if max_iter is None:
        max_iter = 1000 + 50 * (T.n_total + m)

    if m == 0:
        x = np.where(lp.objective > 0, lp.upper, lp.lower)
        return LpResult("optimal", float(lp.objective @ x), x, 0)

    # phase 1: start nonbasic at lower bounds, basis of artificials
    start = T.lower[: T.n_total].copy()
    residual = T.b - T.A @ start
    T.add_artificials(residual)
    basis = list(range(T.artificial_start, T.artificial_start + m))
    at_upper = np.zeros(T.n_total, dtype=bool)
    phase1_cost = np.zeros(T.n_total)
    phase1_cost[T.artificial_start :] = -1.0
    x = _iterate(T, basis, at_upper, phase1_cost, max_iter)
    infeas = float(np.sum(x[T.artificial_start :]))
    if infeas > FEAS_TOL:
        return LpResult("infeasible", None, None, T.iterations)

    # pivot lingering artificials out of the basis where possible, then pin them
    for pos in range(m):
        j = basis[pos]
        if j < T.artificial_start:
            continue
        B = T.A[:, basis]
        pivoted = False
        for cand in range(T.artificial_start):
            if cand in basis:
                continue
            d = np.linalg.solve(B, T.A[:, cand])
            if abs(d[pos]) > PIVOT_TOL:
                basis[pos] = cand
                at_upper[cand] = False
                pivoted = True
                break
        if not pivoted:
            T.freeze(j)  # redundant row: artificial stays basic at 0
    for j in range(T.artificial_start, T.n_total):
        if j not in basis:
            T.freeze(j)

    # phase 2
    phase2_cost = np.zeros(T.n_total)
    phase2_cost[:n] = lp.objective
    x = _iterate(T, basis, at_upper, phase2_cost, max_iter)
    point = x[:n].copy()
    # guard against drift outside the box from degenerate pivots
    point = np.minimum(np.maximum(point, lp.lower), lp.upper)
    return LpResult("optimal", float(lp.objective @ point), point, T.iterations)
