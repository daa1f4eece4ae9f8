"""Affine alignment between embedding spaces and concept strength maps.

A vision classifier's embedding space ``Z_f`` is aligned to the
language-image space ``Z_g`` by an affine map ``z = M w + d`` fitted by
least squares over row-aligned embedding pairs.  Concept strength at an
input is the cosine similarity between its (possibly mapped) embedding and
the concept's direction.

The default fit solves the normal equations in closed form with a ridge of
1e-8 on the Gram matrix; the objective is a convex quadratic, so this is
exact.  A full-batch gradient-descent path (lr 0.01, momentum 0.9, weight
decay 5e-4, 50 epochs) is available behind a flag for parity with
training-loop setups.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .directions import ConceptDirection, zero_shot_classify
from .embeddings import EmbeddingSet, as_vector, cosine_similarity
from .errors import DimMismatch, FormatError, RowMismatch, SingularSystem, UnknownConcept
from .lang import ClassLabel

__all__ = [
    "AffineMap",
    "RepMode",
    "RepMap",
    "MapQuality",
    "fit_affine_map",
    "apply_map",
    "map_metrics",
    "rep_value",
    "check_faithfulness",
    "FaithfulnessViolation",
    "save_affine_map",
    "load_affine_map",
]

RIDGE = 1e-8


@dataclass(frozen=True)
class AffineMap:
    """``z = M w + d`` from a ``p_f``-dim space into a ``p_g``-dim space."""

    M: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.M, dtype=np.float64)
        d = np.asarray(self.d, dtype=np.float64)
        if M.ndim != 2 or d.ndim != 1 or M.shape[0] != d.size:
            raise DimMismatch(f"M {M.shape} incompatible with d {d.shape}")
        if not (np.all(np.isfinite(M)) and np.all(np.isfinite(d))):
            raise ValueError("affine map has non-finite entries")
        M.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "d", d)

    @property
    def p_f(self) -> int:
        return self.M.shape[1]

    @property
    def p_g(self) -> int:
        return self.M.shape[0]

    @classmethod
    def identity(cls, p: int) -> "AffineMap":
        return cls(np.eye(p), np.zeros(p))


def _aligned_pair(F: EmbeddingSet, G: EmbeddingSet) -> tuple[np.ndarray, np.ndarray]:
    if F.ids != G.ids:
        raise RowMismatch("embedding sets must be row-aligned by id")
    return F.matrix, G.matrix


def fit_affine_map(
    F: EmbeddingSet,
    G: EmbeddingSet,
    *,
    gradient_descent: bool = False,
    epochs: int = 50,
    learning_rate: float = 0.01,
    momentum: float = 0.9,
    weight_decay: float = 0.0005,
) -> AffineMap:
    """Least-squares affine map minimizing the mean squared alignment error.

    Closed-form normal equations by default.  ``gradient_descent=True``
    switches to full-batch gradient descent from zero initialization with
    the stated hyperparameters; weight decay biases that optimum slightly,
    so use it only for parity experiments against training-loop setups.

    Raises :class:`SingularSystem` when the design matrix is rank-deficient
    (fewer than ``p_f + 1`` independent rows).
    """
    W, Z = _aligned_pair(F, G)
    n, p_f = W.shape
    X = np.hstack([W, np.ones((n, 1))])
    if np.linalg.matrix_rank(X) < p_f + 1:
        raise SingularSystem(
            f"{n} rows cannot determine a {Z.shape[1]}x{p_f} map plus offset"
        )
    if gradient_descent:
        return _fit_gd(W, Z, epochs, learning_rate, momentum, weight_decay)
    gram = X.T @ X + RIDGE * np.eye(p_f + 1)
    coeffs = np.linalg.solve(gram, X.T @ Z)  # (p_f+1) x p_g
    return AffineMap(M=coeffs[:p_f].T.copy(), d=coeffs[p_f].copy())


def _fit_gd(W, Z, epochs, lr, momentum, weight_decay) -> AffineMap:
    n, p_f = W.shape
    p_g = Z.shape[1]
    M = np.zeros((p_g, p_f))
    d = np.zeros(p_g)
    vM = np.zeros_like(M)
    vd = np.zeros_like(d)
    for _ in range(epochs):
        resid = W @ M.T + d - Z  # n x p_g
        gM = 2.0 * resid.T @ W / n + weight_decay * M
        gd_ = 2.0 * resid.sum(axis=0) / n + weight_decay * d
        vM = momentum * vM - lr * gM
        vd = momentum * vd - lr * gd_
        M = M + vM
        d = d + vd
    return AffineMap(M=M, d=d)


def apply_map(m: AffineMap, w) -> np.ndarray:
    v = as_vector(w, "w")
    if v.size != m.p_f:
        raise DimMismatch(f"map expects dim {m.p_f}, got {v.size}")
    return m.M @ v + m.d


@dataclass(frozen=True)
class MapQuality:
    """Fit quality: per-row squared-norm MSE and pooled R^2 (1 = perfect)."""

    mse: float
    r2: float


def map_metrics(m: AffineMap, F: EmbeddingSet, G: EmbeddingSet) -> MapQuality:
    """MSE is the mean over rows of ``||M w + d - g||^2``; R^2 pools all
    output entries, with the total sum of squares taken about each column's
    mean."""
    W, Z = _aligned_pair(F, G)
    pred = W @ m.M.T + m.d
    resid = pred - Z
    mse = float(np.mean(np.sum(resid**2, axis=1)))
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((Z - Z.mean(axis=0)) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res == 0.0 else -np.inf
    else:
        r2 = 1.0 - ss_res / ss_tot
    return MapQuality(mse=mse, r2=r2)


class RepMode(Enum):
    """How concept strength is computed from an input vector."""

    VLM_ONLY = "vlm-only"            # input is already in the direction space
    VIA_AFFINE = "via-affine"        # input is a vision embedding; map first
    HAT_ON_EMBEDDINGS = "hat"        # head-input embeddings consumed directly


@dataclass(frozen=True)
class RepMap:
    """Concept strength functions backed by directions and an optional map."""

    mode: RepMode
    directions: Mapping[str, ConceptDirection]
    map: AffineMap | None = None

    def __post_init__(self):
        if self.mode is RepMode.VIA_AFFINE and self.map is None:
            raise ValueError("via-affine mode requires an affine map")


def rep_value(r: RepMap, con: str, v) -> float:
    """Strength of concept ``con`` at vector ``v`` under representation ``r``."""
    if con not in r.directions:
        raise UnknownConcept(f"no direction for concept {con!r}")
    vec = as_vector(v, "v")
    if r.mode is RepMode.VIA_AFFINE:
        vec = apply_map(r.map, vec)
    return cosine_similarity(vec, r.directions[con].direction)


def rep_values(r: RepMap, cons: Sequence[str], v) -> dict[str, float]:
    vec = as_vector(v, "v")
    if r.mode is RepMode.VIA_AFFINE:
        vec = apply_map(r.map, vec)
    out = {}
    for con in cons:
        if con not in r.directions:
            raise UnknownConcept(f"no direction for concept {con!r}")
        out[con] = cosine_similarity(vec, r.directions[con].direction)
    return out


@dataclass(frozen=True)
class FaithfulnessViolation:
    """One row where the mapped vision embedding betrays the alignment."""

    row_id: str
    kind: str  # "distance" or "classification"
    distance: float
    vlm_label: str | None = None
    mapped_label: str | None = None


def check_faithfulness(
    m: AffineMap,
    F: EmbeddingSet,
    G: EmbeddingSet,
    class_dirs: Sequence[ConceptDirection] | None = None,
    tol: float = 1e-6,
    labels: Sequence[ClassLabel] | None = None,
) -> list[FaithfulnessViolation]:
    """Rows where ``M w + d`` strays from the true embedding.

    Reports distance violations (``||M w + d - g|| > tol``) and, when class
    directions are given, rows where the zero-shot label of the mapped
    embedding disagrees with that of the true embedding.
    """
    W, Z = _aligned_pair(F, G)
    pred = W @ m.M.T + m.d
    dists = np.linalg.norm(pred - Z, axis=1)
    out: list[FaithfulnessViolation] = []
    for i, rid in enumerate(F.ids):
        if dists[i] > tol:
            out.append(FaithfulnessViolation(rid, "distance", float(dists[i])))
    if class_dirs is not None:
        for i, rid in enumerate(F.ids):
            true_label = zero_shot_classify(Z[i], class_dirs, labels)
            mapped_label = zero_shot_classify(pred[i], class_dirs, labels)
            if true_label != mapped_label:
                out.append(
                    FaithfulnessViolation(
                        rid,
                        "classification",
                        float(dists[i]),
                        vlm_label=true_label.name,
                        mapped_label=mapped_label.name,
                    )
                )
    return out


# --- affine_map.json --------------------------------------------------------------


def save_affine_map(path, m: AffineMap) -> None:
    payload = {
        "p_f": m.p_f,
        "p_g": m.p_g,
        "M": [[float(x) for x in row] for row in m.M],
        "d": [float(x) for x in m.d],
    }
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_affine_map(path) -> AffineMap:
    path = Path(path)
    raw = json.loads(path.read_text(encoding="utf-8"))
    for key in ("p_f", "p_g", "M", "d"):
        if key not in raw:
            raise FormatError(f"{path}: affine map file missing {key!r}")
    M = np.array(raw["M"], dtype=np.float64)
    d = np.array(raw["d"], dtype=np.float64)
    if M.shape != (raw["p_g"], raw["p_f"]) or d.shape != (raw["p_g"],):
        raise FormatError(f"{path}: M/d shapes disagree with p_f/p_g")
    return AffineMap(M=M, d=d)
