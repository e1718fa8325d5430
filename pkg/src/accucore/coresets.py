"""Accurate coreset constructions.

Each function takes a :class:`~accucore.core.WeightedSet` and returns a
small summary on which the matching evaluator in :mod:`accucore.core`
gives exactly the same value as on the input, for every query.

Subset constructions return a :class:`WeightedSubset`, whose ``indices``
point back into the input rows. Whenever the size bound of a construction
is at least ``n`` the input is returned unchanged.

Kinds accepted by :func:`build`:

============== =========================== ==================
kind           evaluator                   size
============== =========================== ==================
one-center     ``eval_max_distance``       2
vectors-sum-1  ``eval_weighted_sum``       1
vectors-sum-2  ``eval_weighted_sum``       <= d + 1
vectors-sum-3  ``eval_weighted_sum``       <= d + 2
one-mean-1     ``eval_sq_dist_sum``        3 moments
one-mean-2     ``eval_sq_dist_sum``        <= d + 2
one-mean-3     ``eval_sq_dist_sum``        <= d + 3
one-segment    ``eval_segment_loss``       d + 2
matrix-norm-1  ``eval_quadratic_form``     d
matrix-norm-2  ``eval_quadratic_form``     <= d^2 + 1
lms            ``eval_lms``                <= (d + 1)^2 + 1
============== =========================== ==================

For one-segment and lms the first (time) or last (label) column is not
counted in ``d``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .caratheodory import caratheodory, fast_caratheodory, streaming_caratheodory
from .core import (
    CoresetReport,
    DimensionError,
    GeometryError,
    InputError,
    WeightError,
    WeightedSet,
)
from .linalg import lstsq, qr, qr_pivoted, rotation_to_uniform, thin_svd

KINDS = (
    "one-center",
    "vectors-sum-1",
    "vectors-sum-2",
    "vectors-sum-3",
    "one-mean-1",
    "one-mean-2",
    "one-mean-3",
    "one-segment",
    "matrix-norm-1",
    "matrix-norm-2",
    "lms",
)

# kinds that need nonnegative weights
BOUNDED_KINDS = frozenset(
    {"vectors-sum-3", "one-mean-3", "one-segment", "matrix-norm-1", "matrix-norm-2", "lms"}
)

CARATHEODORY_METHODS = {
    "plain": caratheodory,
    "streaming": streaming_caratheodory,
    "fast": fast_caratheodory,
}

COLLINEAR_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class WeightedSubset(WeightedSet):
    """A weighted set whose rows are rows ``indices`` of some input set."""

    indices: Optional[np.ndarray] = None

    def __post_init__(self):
        super().__post_init__()
        idx = np.arange(self.n) if self.indices is None else np.asarray(self.indices, dtype=int)
        if idx.shape != (self.n,):
            raise DimensionError(f"{idx.size} indices for {self.n} points")
        idx = idx.copy()
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)


def _subset(P: WeightedSet, indices, weights, nonnegative=False) -> WeightedSubset:
    indices = np.asarray(indices, dtype=int)
    return WeightedSubset(P.points[indices], weights, nonnegative, indices=indices)


def _passthrough(P: WeightedSet, nonnegative=False) -> WeightedSubset:
    return WeightedSubset(P.points, P.weights, nonnegative, indices=np.arange(P.n))


def _nonnegative(P: WeightedSet) -> np.ndarray:
    w = P.weights
    if np.any(w < 0):
        i = int(np.flatnonzero(w < 0)[0])
        raise WeightError(f"weight {i} is negative ({w[i]!r})")
    return w


def _positive_total(P: WeightedSet) -> float:
    _nonnegative(P)
    total = P.total_weight
    if not total > 0:
        raise InputError("weights sum to zero")
    return total


def _caratheodory_subset(P: WeightedSet, lifted: np.ndarray, method: str) -> WeightedSubset:
    try:
        reduce = CARATHEODORY_METHODS[method]
    except KeyError:
        raise InputError(
            f"unknown method {method!r}; expected one of {sorted(CARATHEODORY_METHODS)}"
        ) from None
    cc = reduce(WeightedSet(lifted, P.weights, nonnegative=True))
    return _subset(P, cc.indices, cc.weights, nonnegative=True)


def _spanning_subset(P: WeightedSet, lifted: np.ndarray) -> WeightedSubset:
    """Rows of ``lifted`` forming a pivoted basis, with coefficients that
    reproduce ``sum_i w_i lifted_i``."""
    target = P.weights @ lifted
    f = qr_pivoted(lifted.T)
    basis = np.sort(f.perm[: f.rank])
    coef = lstsq(lifted[basis].T, target)
    return _subset(P, basis, coef)


# --- 1-center and monotone queries -------------------------------------------


@dataclass(frozen=True, eq=False)
class ExtremePair:
    """The two endpoints of a collinear point set, by input row."""

    index_min: int
    index_max: int
    p_min: np.ndarray
    p_max: np.ndarray

    def as_subset(self, P: WeightedSet) -> WeightedSubset:
        idx = [self.index_min] if self.index_min == self.index_max else [self.index_min, self.index_max]
        return _subset(P, idx, P.weights[idx])


def extreme_points(P: WeightedSet) -> ExtremePair:
    """Endpoints of ``P`` along the line that contains it.

    The farthest input point from any query is one of the two endpoints, so
    the pair is an accurate coreset for ``eval_max_distance`` and, on the
    real line, for ``eval_monotonic_max``. All weights must be equal: with
    unequal weights no subset coreset exists in general (see
    :func:`weighted_one_center_counterexample`).

    Raises
    ------
    GeometryError
        If the points are not collinear within ``COLLINEAR_RTOL``.
    WeightError
        If the weights are not all equal.
    """
    if np.any(P.weights != P.weights[0]):
        raise WeightError("extreme points need equal weights on every point")
    X = P.points - P.points.mean(axis=0)
    f = thin_svd(X)
    if f.r == 0:
        return ExtremePair(0, 0, P.points[0].copy(), P.points[0].copy())
    direction = f.V[:, 0]
    t = X @ direction
    off_line = np.linalg.norm(X - np.outer(t, direction))
    if off_line > COLLINEAR_RTOL * np.linalg.norm(X):
        raise GeometryError("points are not collinear; no two-point coreset exists")
    lo, hi = int(np.argmin(t)), int(np.argmax(t))
    return ExtremePair(lo, hi, P.points[lo].copy(), P.points[hi].copy())


def counterexample_exact(n: int):
    """Exact rational weights, points and queries of the weighted 1-center
    counterexample (see :func:`weighted_one_center_counterexample`)."""
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= 20:
        raise InputError(f"n must be an integer in [1, 20], got {n!r}")
    weights = [Fraction(2)]
    for i in range(2, n + 1):
        weights.append(weights[-1] + Fraction(1, 4 ** (i - 1)))
    points = [Fraction(2) ** (5 - i) / weights[i - 1] for i in range(1, n + 1)]
    queries = [-(2 ** (4 + i)) + 1 for i in range(1, n + 1)]
    return weights, points, queries


def weighted_one_center_counterexample(n: int):
    """Weighted points on the line where every point is the unique farthest
    one for some query, so no proper subset is an accurate coreset.

    ``w_1 = 2``, ``w_i = w_{i-1} + 4^(1-i)``, ``p_i = 2^(5-i) / w_i`` and
    the query ``x_i = 1 - 2^(4+i)`` is maximized by ``p_i``.

    Parameters
    ----------
    n : int
        Number of points, 1 to 20.

    Returns
    -------
    P : WeightedSet
    queries : ndarray of shape (n,)
    """
    weights, points, queries = counterexample_exact(n)
    P = WeightedSet(np.array([float(p) for p in points]), np.array([float(w) for w in weights]))
    return P, np.array(queries, dtype=float)


# --- vectors sum --------------------------------------------------------------


def vectors_sum_single(P: WeightedSet) -> WeightedSet:
    """One weighted point with the same weighted sum as ``P``.

    With ``W = sum(w) != 0`` the point is ``sum(w p) / W`` with weight ``W``.
    With ``W == 0`` it falls back to ``sum(w p)`` with weight 1; the loss of
    ``P`` then no longer depends on the query, and only the value at
    ``x = 0`` is reproduced.
    """
    total = P.total_weight
    moment = P.weights @ P.points
    if total != 0.0:
        return WeightedSet((moment / total)[None, :], [total])
    return WeightedSet(moment[None, :], [1.0])


def vectors_sum_subset(P: WeightedSet) -> WeightedSubset:
    """At most ``d + 1`` input points with real (possibly negative) weights
    that keep ``sum(w)`` and ``sum(w p)``.

    The lifted points ``(p | 1)`` span at most ``d + 1`` dimensions; a
    column-pivoted QR picks a basis among them and least squares gives the
    coefficients. The result has rank-many points.
    """
    if P.n <= P.d + 1:
        return _passthrough(P)
    return _spanning_subset(P, np.hstack([P.points, np.ones((P.n, 1))]))


def vectors_sum_bounded(P: WeightedSet, method: str = "fast") -> WeightedSubset:
    """At most ``d + 2`` input points with weights in ``[0, sum(w)]`` that
    keep ``sum(w)`` and ``sum(w p)``.

    ``method`` picks the Caratheodory schedule: ``"plain"``, ``"streaming"``
    or ``"fast"``.
    """
    _positive_total(P)
    if P.n <= P.d + 2:
        return _passthrough(P, nonnegative=True)
    return _caratheodory_subset(P, np.hstack([P.points, np.ones((P.n, 1))]), method)


# --- 1-mean -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MomentSummary:
    """Zeroth, first and second moments of a weighted set."""

    sq_norm_moment: float
    weight_moment: float
    mean_moment: np.ndarray

    @property
    def d(self) -> int:
        return self.mean_moment.size

    def cost(self, x) -> float:
        """``sum w ||p - x||^2`` recovered from the moments."""
        x = np.array(x, dtype=float).reshape(-1)
        if x.size != self.d:
            raise DimensionError(f"query has dimension {x.size}, moments have {self.d}")
        if not np.all(np.isfinite(x)):
            raise InputError("query contains NaN or Inf")
        return float(self.sq_norm_moment + (x @ x) * self.weight_moment - 2.0 * (x @ self.mean_moment))


def one_mean_moments(P: WeightedSet) -> MomentSummary:
    """``(sum w |p|^2, sum w, sum w p)``; enough for every 1-mean query."""
    mean = P.weights @ P.points
    mean.setflags(write=False)
    return MomentSummary(
        float(P.weights @ np.sum(P.points**2, axis=1)),
        P.total_weight,
        mean,
    )


def _mean_lift(points: np.ndarray) -> np.ndarray:
    n = points.shape[0]
    return np.hstack([points, np.sum(points**2, axis=1)[:, None], np.ones((n, 1))])


def one_mean_subset(P: WeightedSet) -> WeightedSubset:
    """At most ``d + 2`` input points, real weights, same three moments."""
    if P.n <= P.d + 2:
        return _passthrough(P)
    return _spanning_subset(P, _mean_lift(P.points))


def one_mean_bounded(P: WeightedSet, method: str = "fast") -> WeightedSubset:
    """At most ``d + 3`` input points, weights in ``[0, sum(w)]``, same
    three moments."""
    _positive_total(P)
    if P.n <= P.d + 3:
        return _passthrough(P, nonnegative=True)
    return _caratheodory_subset(P, _mean_lift(P.points), method)


# --- 1-segment ----------------------------------------------------------------


def one_segment(P: WeightedSet) -> WeightedSet:
    """``d + 2`` rows ``(t | p)`` with one common weight that reproduce
    ``eval_segment_loss`` for every affine query.

    Rows ``sqrt(w) (1 | t | p)`` form ``X``. With ``X = U S V^T`` and ``u``
    the first column of ``S V^T`` (zero padded to ``d + 2`` rows), a
    reflection ``Z`` maps ``u`` to the constant vector ``sqrt(c) 1``. The
    rows of ``Z S V^T / sqrt(c)`` then start with 1, and dropping that
    leading column gives the coreset rows, each with weight ``c``.

    When every weight is zero, ``c = 0`` and the rows are zero.
    """
    if P.d < 2:
        raise DimensionError("segment data needs a time column and at least one coordinate")
    w = _nonnegative(P)
    n, cols = P.n, P.d + 1
    X = np.sqrt(w)[:, None] * np.hstack([np.ones((n, 1)), P.points])
    f = thin_svd(X)
    SVt = np.zeros((cols, cols))
    SVt[: f.r] = f.singular_values[:, None] * f.V.T
    u = SVt[:, 0]
    if not np.any(u != 0.0):
        return WeightedSet(np.zeros((cols, P.d)), np.zeros(cols), nonnegative=True)
    Z, c = rotation_to_uniform(u)
    B = (Z @ SVt) / np.sqrt(c)
    return WeightedSet(B[:, 1:], np.full(cols, c), nonnegative=True)


# --- matrix 2-norm and LMS ---------------------------------------------------


def matrix_norm_factor(P: WeightedSet) -> WeightedSet:
    """``d`` rows ``R`` with unit weights and ``R^T R = A^T A`` for the
    sqrt(w)-scaled point matrix ``A``."""
    w = _nonnegative(P)
    A = np.sqrt(w)[:, None] * P.points
    if A.shape[0] < P.d:
        A = np.vstack([A, np.zeros((P.d - A.shape[0], P.d))])
    R = qr(A).R[: P.d]
    return WeightedSet(R, np.ones(P.d), nonnegative=True)


def _outer_lift(points: np.ndarray) -> np.ndarray:
    return np.einsum("ni,nj->nij", points, points).reshape(points.shape[0], -1)


def matrix_norm_subset(P: WeightedSet, method: str = "fast") -> WeightedSubset:
    """At most ``d^2 + 1`` input points, weights in ``[0, sum(w)]``, same
    second-moment matrix ``sum w p p^T``."""
    _positive_total(P)
    if P.n <= P.d**2 + 1:
        return _passthrough(P, nonnegative=True)
    return _caratheodory_subset(P, _outer_lift(P.points), method)


def lms_coreset(P: WeightedSet, method: str = "fast") -> WeightedSubset:
    """Subset coreset for least-mean-squares losses on rows ``(a | b)``.

    The matrix-norm subset of the joined rows keeps ``sum w (a|b)(a|b)^T``,
    hence ``sum w (a^T x - b)^2`` for every ``x``.
    """
    if P.d < 2:
        raise DimensionError("LMS data needs at least one feature and a label column")
    return matrix_norm_subset(P, method=method)


# --- dispatch -----------------------------------------------------------------

Summary = Union[WeightedSet, MomentSummary]


def size_bound(kind: str, d: int) -> int:
    """Largest output size of ``kind`` on data with ``d`` point columns
    (time and label columns excluded)."""
    bounds = {
        "one-center": 2,
        "vectors-sum-1": 1,
        "vectors-sum-2": d + 1,
        "vectors-sum-3": d + 2,
        "one-mean-1": 3,
        "one-mean-2": d + 2,
        "one-mean-3": d + 3,
        "one-segment": d + 2,
        "matrix-norm-1": d,
        "matrix-norm-2": d * d + 1,
        "lms": (d + 1) ** 2 + 1,
    }
    try:
        return bounds[kind]
    except KeyError:
        raise InputError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}") from None


def point_dim(kind: str, data_cols: int) -> int:
    """``d`` as used by :func:`size_bound`, given the number of data columns."""
    return data_cols - 1 if kind in ("one-segment", "lms") else data_cols


def build(kind: str, P: WeightedSet, method: str = "fast"):
    """Construct the coreset of ``kind`` for ``P``.

    Returns
    -------
    summary : WeightedSet or MomentSummary
    report : CoresetReport
    """
    size_bound(kind, 1)
    notes = []
    if kind == "one-center":
        summary = extreme_points(P).as_subset(P)
    elif kind == "vectors-sum-1":
        summary = vectors_sum_single(P)
        if P.total_weight == 0.0:
            notes.append("weights sum to zero: single point holds the weighted sum, exact only at x = 0")
    elif kind == "vectors-sum-2":
        summary = vectors_sum_subset(P)
    elif kind == "vectors-sum-3":
        summary = vectors_sum_bounded(P, method)
    elif kind == "one-mean-1":
        summary = one_mean_moments(P)
    elif kind == "one-mean-2":
        summary = one_mean_subset(P)
    elif kind == "one-mean-3":
        summary = one_mean_bounded(P, method)
    elif kind == "one-segment":
        summary = one_segment(P)
        if float(summary.weights[0]) == 0.0:
            notes.append("all weights are zero: zero rows with weight c = 0")
    elif kind == "matrix-norm-1":
        summary = matrix_norm_factor(P)
    elif kind == "matrix-norm-2":
        summary = matrix_norm_subset(P, method)
    else:
        summary = lms_coreset(P, method)

    if isinstance(summary, MomentSummary):
        size, out_weight = 3, summary.weight_moment
    else:
        size, out_weight = summary.n, summary.total_weight
    if kind in ("one-segment", "matrix-norm-1"):
        notes.append("not a subset: rows are derived from the input")
    report = CoresetReport(kind, size, P.total_weight, out_weight, notes=notes)
    return summary, report
