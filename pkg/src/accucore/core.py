"""Weighted sets, query objects and the exact (brute-force) loss evaluators.

Every evaluator here touches every input point. They are the ground truth
that the coreset constructions in :mod:`accucore.coresets` are checked
against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


class CoresetError(ValueError):
    """Base class for all errors raised by this package."""


class InputError(CoresetError):
    """Malformed or non-finite input."""


class DimensionError(CoresetError):
    """Shapes that do not agree."""


class WeightError(CoresetError):
    """Weights that violate a construction's sign requirement."""


class GeometryError(CoresetError):
    """Input whose geometry admits no coreset of the requested kind."""


def _as_matrix(points) -> np.ndarray:
    arr = np.array(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DimensionError(f"points must be a 1-D or 2-D array, got ndim={arr.ndim}")
    return arr


@dataclass(frozen=True, eq=False)
class WeightedSet:
    """``n`` points in ``d`` dimensions, each carrying a real weight.

    A 1-D ``points`` array is read as ``n`` points on the real line. Missing
    ``weights`` default to all ones. With ``nonnegative=True`` every weight
    must be >= 0.

    Both arrays are copied and frozen (read-only) on construction.
    """

    points: np.ndarray
    weights: Optional[np.ndarray] = None
    nonnegative: bool = False

    def __post_init__(self):
        pts = _as_matrix(self.points)
        n, d = pts.shape
        if n < 1 or d < 1:
            raise DimensionError(f"need n >= 1 and d >= 1, got shape {pts.shape}")
        if self.weights is None:
            w = np.ones(n)
        else:
            w = np.array(self.weights, dtype=float).reshape(-1)
        if w.shape[0] != n:
            raise DimensionError(f"{w.shape[0]} weights for {n} points")
        if not np.all(np.isfinite(pts)):
            raise InputError("points contain NaN or Inf")
        if not np.all(np.isfinite(w)):
            raise InputError("weights contain NaN or Inf")
        if self.nonnegative and np.any(w < 0):
            i = int(np.flatnonzero(w < 0)[0])
            raise WeightError(f"weight {i} is negative ({w[i]!r})")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weights))

    def __len__(self) -> int:
        return self.n

    def subset(self, indices, weights=None) -> "WeightedSet":
        """Rows ``indices`` of this set, optionally reweighted."""
        idx = np.asarray(indices, dtype=int)
        w = self.weights[idx] if weights is None else weights
        return WeightedSet(self.points[idx], w, nonnegative=self.nonnegative)

    def require_nonnegative(self) -> "WeightedSet":
        """Same set with the nonnegativity flag raised (validated)."""
        if self.nonnegative:
            return self
        return WeightedSet(self.points, self.weights, nonnegative=True)


@dataclass(frozen=True, eq=False)
class SegmentQuery:
    """The affine map ``t -> intercept + slope * t`` from R to R^d."""

    intercept: np.ndarray
    slope: np.ndarray

    def __post_init__(self):
        a = np.array(self.intercept, dtype=float).reshape(-1)
        b = np.array(self.slope, dtype=float).reshape(-1)
        if a.shape != b.shape:
            raise DimensionError(f"intercept has {a.size} entries, slope has {b.size}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise InputError("segment query contains NaN or Inf")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "intercept", a)
        object.__setattr__(self, "slope", b)

    @property
    def d(self) -> int:
        return self.intercept.size

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            return self.intercept + self.slope * t
        return self.intercept[None, :] + t[:, None] * self.slope[None, :]


@dataclass
class CoresetReport:
    """Metadata describing one coreset construction."""

    kind: str
    coreset_size: int
    weight_sum_input: float
    weight_sum_coreset: float
    max_query_rel_error: Optional[float] = None
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "coreset_size": int(self.coreset_size),
            "weight_sum_input": float(self.weight_sum_input),
            "weight_sum_coreset": float(self.weight_sum_coreset),
            "max_query_rel_error": (
                None if self.max_query_rel_error is None else float(self.max_query_rel_error)
            ),
            "notes": list(self.notes),
        }


def _query(x, d: int) -> np.ndarray:
    x = np.array(x, dtype=float).reshape(-1)
    if x.size != d:
        raise DimensionError(f"query has dimension {x.size}, points have {d}")
    if not np.all(np.isfinite(x)):
        raise InputError("query contains NaN or Inf")
    return x


def eval_max_distance(P: WeightedSet, x) -> float:
    """``max_p w(p) * ||p - x||``."""
    x = _query(x, P.d)
    dist = np.sqrt(np.sum((P.points - x) ** 2, axis=1))
    return float(np.max(P.weights * dist))


def eval_monotonic_max(P: WeightedSet, g: Callable[[float], float]) -> float:
    """``max_p g(p)`` over points on the real line (unit weights assumed).

    ``g`` is evaluated at every point, so the result is correct for any ``g``;
    the two-point coreset is only valid when ``g`` is monotone or decreasing
    then increasing.
    """
    if P.d != 1:
        raise DimensionError(f"monotonic queries need d == 1, got d={P.d}")
    return float(max(g(float(p)) for p in P.points[:, 0]))


def eval_weighted_sum(P: WeightedSet, x) -> np.ndarray:
    """The vector ``sum_p w(p) (p - x)``."""
    x = _query(x, P.d)
    return P.weights @ (P.points - x)


def eval_sq_dist_sum(P: WeightedSet, x) -> float:
    """Weighted 1-mean cost ``sum_p w(p) ||p - x||^2``."""
    x = _query(x, P.d)
    return float(P.weights @ np.sum((P.points - x) ** 2, axis=1))


def eval_segment_loss(P: WeightedSet, g: SegmentQuery) -> float:
    """``sum w(p) ||p - g(t)||^2`` for rows laid out as ``(t | p)``."""
    if P.d < 2:
        raise DimensionError("segment data needs a time column and at least one coordinate")
    if g.d != P.d - 1:
        raise DimensionError(f"segment query maps into R^{g.d}, data lives in R^{P.d - 1}")
    t = P.points[:, 0]
    resid = P.points[:, 1:] - g(t)
    return float(P.weights @ np.sum(resid**2, axis=1))


def eval_quadratic_form(P: WeightedSet, x) -> float:
    """``sum_p w(p) (p^T x)^2``, i.e. ``||A x||^2`` for the sqrt(w)-scaled rows."""
    x = _query(x, P.d)
    return float(P.weights @ (P.points @ x) ** 2)


def orthogonal_complement(S: np.ndarray) -> np.ndarray:
    """Orthonormal basis (as columns) of the complement of ``span(S)``."""
    from .linalg import qr

    d, j = S.shape
    return qr(S).Q[:, j:]


def eval_subspace_distance(P: WeightedSet, S, atol: float = 1e-9) -> float:
    """Weighted sum of squared distances from the points to ``span(S)``.

    ``S`` is ``d x j`` with orthonormal columns and ``1 <= j < d``. The value
    is ``||A S_perp||_F^2`` with ``A`` the sqrt(w)-scaled point matrix.
    """
    S = np.array(S, dtype=float)
    if S.ndim == 1:
        S = S.reshape(-1, 1)
    d, j = S.shape
    if d != P.d:
        raise DimensionError(f"subspace lives in R^{d}, points in R^{P.d}")
    if not 1 <= j < d:
        raise DimensionError(f"need 1 <= j < d, got j={j}, d={d}")
    if not np.all(np.isfinite(S)):
        raise InputError("subspace basis contains NaN or Inf")
    if np.linalg.norm(S.T @ S - np.eye(j)) > atol:
        raise InputError("subspace basis columns are not orthonormal")
    perp = orthogonal_complement(S)
    proj = P.points @ perp
    return float(P.weights @ np.sum(proj**2, axis=1))


def eval_lms(P: WeightedSet, x) -> float:
    """``sum_i w_i (a_i^T x - b_i)^2`` for rows laid out as ``(a | b)``."""
    if P.d < 2:
        raise DimensionError("LMS data needs at least one feature and a label column")
    x = _query(x, P.d - 1)
    resid = P.points[:, :-1] @ x - P.points[:, -1]
    return float(P.weights @ resid**2)
