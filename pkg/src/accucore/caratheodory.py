"""Caratheodory sparsification of a nonnegatively weighted point set.

Three schedules compute the same thing: at most ``d + 1`` input points
with positive weights that keep both the weight total and the weighted
sum of the input.

``caratheodory``
    The elimination loop: one null-space step removes at least one point,
    repeated until ``d + 1`` remain. ``O(n^2 d^2)`` with a fresh
    factorization per round; here the row-space basis is downdated between
    rounds, which brings it to ``O(n^2 d)``.
``streaming_caratheodory``
    Keeps ``d + 1`` points and folds the input in one point at a time,
    eliminating back down after each insertion. ``O(n d^3)``.
``fast_caratheodory``
    Splits the input into ``k`` contiguous blocks, runs the elimination on
    the block means, keeps only the blocks that survive and repeats.
    ``O(n d + d^4 log n)`` for ``k = 2d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import InputError, WeightError, WeightedSet
from .linalg import _householder_rows, _apply_reflectors, null_space_vector

# weights at or below this fraction of the total are treated as zero
DROP_RTOL = 1e-14
# downdate the basis only while the removed column's leverage stays below this
_MAX_DOWNDATE_LEVERAGE = 0.99
_NULL_RESIDUAL_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class ConvexCombination:
    """Indices into the input set plus their new (positive) weights."""

    indices: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return self.indices.size

    def apply(self, P: WeightedSet) -> WeightedSet:
        return WeightedSet(P.points[self.indices], self.weights, nonnegative=True)


@dataclass(frozen=True, eq=False)
class EliminationRound:
    """What one elimination step did; handed to ``on_round`` callbacks."""

    indices: np.ndarray
    weights_before: np.ndarray
    v: np.ndarray
    alpha: float
    pivot: int
    weights_after: np.ndarray


def _validate(P: WeightedSet):
    w = np.asarray(P.weights, dtype=float)
    if np.any(w < 0):
        i = int(np.flatnonzero(w < 0)[0])
        raise WeightError(f"weight {i} is negative ({w[i]!r})")
    total = float(np.sum(w))
    if not total > 0:
        raise InputError("weights sum to zero")
    return w, total


def _finish(indices, weights, total) -> ConvexCombination:
    weights = weights * (total / np.sum(weights))
    order = np.argsort(indices, kind="stable")
    return ConvexCombination(np.asarray(indices, dtype=int)[order], weights[order])


def _eliminate(weights: np.ndarray, v: np.ndarray, total: float, labels=None):
    """Shift ``weights`` along ``v`` until the first weight hits zero.

    ``v`` must satisfy ``sum(v) = 0`` and ``sum(v_i p_i) = 0``. Returns the
    updated weights, ``alpha`` and the pivot position. Ties in the ratio
    test go to the smallest label (position when ``labels`` is None). The
    pivot is set to exactly zero and other weights within
    ``DROP_RTOL * total`` of zero are clamped to zero.
    """
    if not np.any(v > 0):
        v = -v
    pos = np.flatnonzero(v > 0)
    ratios = weights[pos] / v[pos]
    ties = pos[ratios == ratios.min()]
    if labels is None or ties.size == 1:
        pivot = int(ties[0])
    else:
        pivot = int(ties[np.argmin(labels[ties])])
    alpha = float(weights[pivot] / v[pivot])
    new = weights - alpha * v
    new[pivot] = 0.0
    new[new <= DROP_RTOL * total] = 0.0
    return new, alpha, pivot


def _lifted(points: np.ndarray) -> np.ndarray:
    """The ``(d + 1) x m`` matrix whose columns are ``(p_i | 1)``."""
    m = points.shape[0]
    return np.vstack([points.T, np.ones((1, m))])


class _RowSpaceBasis:
    """Orthonormal rows ``Q`` whose span contains the row space of ``M``.

    Only the first ``m`` columns are live. Removing a column swaps the last
    live column into its slot and re-orthonormalizes with the closed form
    ``(I - q q^T)^(-1/2) = I + (1/sqrt(1 - |q|^2) - 1) q q^T / |q|^2``;
    column leverages ``|Q[:, i]|^2`` are updated alongside. A removed column
    of leverage near one makes that ill conditioned, so the basis is then
    rebuilt by Householder.
    """

    def __init__(self, M: np.ndarray):
        self.rebuild(M)

    def rebuild(self, M: np.ndarray):
        r, m = M.shape
        X = M.copy()
        reflectors = _householder_rows(X, r)
        E = np.zeros((m, r))
        E[np.arange(r), np.arange(r)] = 1.0
        self.Q = _apply_reflectors(reflectors, E).T.copy()
        self.lev = np.sum(self.Q * self.Q, axis=0)

    def remove(self, pos: int, m: int, M_live: np.ndarray):
        """Drop live column ``pos`` of ``m``; ``M_live`` is M after the swap."""
        Q = self.Q
        q = Q[:, pos].copy()
        last = m - 1
        Q[:, pos] = Q[:, last]
        self.lev[pos] = self.lev[last]
        levq = float(q @ q)
        if levq == 0.0:
            return
        if levq >= _MAX_DOWNDATE_LEVERAGE:
            self.rebuild(M_live)
            return
        c = (1.0 / math.sqrt(1.0 - levq) - 1.0) / levq
        live = Q[:, :last]
        s = q @ live
        live += np.outer(c * q, s)
        self.lev[:last] += s * s * (2.0 * c + c * c * levq)

    def null_vector(self, m: int) -> np.ndarray:
        Q = self.Q[:, :m]
        j = int(np.argmin(self.lev[:m]))
        v = -(Q[:, j] @ Q)
        v[j] += 1.0
        return v / np.linalg.norm(v)


def caratheodory(
    P: WeightedSet,
    on_round: Optional[Callable[[EliminationRound], None]] = None,
) -> ConvexCombination:
    """Reduce ``P`` to at most ``d + 1`` points with the same weighted sum.

    Weights must be nonnegative with a positive total. They are normalized
    to sum to one for the elimination and scaled back at the end. Points
    with zero weight carry no mass and are removed up front; if at most
    ``d + 1`` points remain, they are returned with their original weights.

    Each round takes a null vector ``v`` of the lifted matrix with columns
    ``(p_i | 1)``, which is the same as solving ``A v' = 0`` for
    ``A = (p_2 - p_1 | ... | p_n - p_1)`` and setting ``v_1 = -sum(v')``.

    ``on_round`` receives an :class:`EliminationRound` after every step.
    """
    w, total = _validate(P)
    keep = np.flatnonzero(w > 0)
    if keep.size <= P.d + 1:
        return ConvexCombination(keep, w[keep].copy())
    return _caratheodory_core(P.points, w, keep, total, on_round)


def _caratheodory_core(points, w, keep, total, on_round=None) -> ConvexCombination:
    d = points.shape[1]
    idx = keep.copy()
    u = w[idx] / total
    M = _lifted(points[idx])
    m = idx.size
    basis = _RowSpaceBasis(M)
    frob_sq = float(np.sum(M * M))
    while m > d + 1:
        live_M = M[:, :m]
        tol = _NULL_RESIDUAL_RTOL * math.sqrt(max(frob_sq, 0.0))
        v = basis.null_vector(m)
        if np.linalg.norm(live_M @ v) > tol:
            basis.rebuild(live_M)
            v = basis.null_vector(m)
            if np.linalg.norm(live_M @ v) > tol:
                v = null_space_vector(live_M)
        before = u[:m].copy()
        u[:m], alpha, pivot = _eliminate(before, v, 1.0, labels=idx[:m])
        if on_round is not None:
            on_round(
                EliminationRound(
                    idx[:m].copy(), before * total, v, alpha, pivot, u[:m] * total
                )
            )
        # descending order: every swapped-in last column is still live
        for pos in np.flatnonzero(u[:m] == 0.0)[::-1]:
            last = m - 1
            frob_sq -= float(M[:, pos] @ M[:, pos])
            idx[pos], u[pos] = idx[last], u[last]
            M[:, pos] = M[:, last]
            m -= 1
            if m > d + 1:
                basis.remove(pos, m + 1, M[:, :m])
    return _finish(idx[:m], u[:m] * total, total)


def _reduce_held(points, idx, weights, d):
    """Eliminate until ``d + 1`` points remain, using ``A = (p_i - p_1)``."""
    while idx.size > d + 1:
        pts = points[idx]
        tail = null_space_vector((pts[1:] - pts[0]).T)
        v = np.concatenate([[-np.sum(tail)], tail])
        weights, _, _ = _eliminate(weights, v, 1.0)
        live = weights > 0
        idx, weights = idx[live], weights[live]
    return idx, weights


def streaming_caratheodory(P: WeightedSet) -> ConvexCombination:
    """One-pass variant: hold ``d + 1`` points, add one, eliminate one."""
    w, total = _validate(P)
    d = P.d
    keep = np.flatnonzero(w > 0)
    if keep.size <= d + 1:
        return ConvexCombination(keep, w[keep].copy())
    wn = w / total
    held_idx = keep[: d + 1]
    held_w = wn[held_idx]
    for i in keep[d + 1 :]:
        held_idx = np.append(held_idx, i)
        held_w = np.append(held_w, wn[i])
        held_idx, held_w = _reduce_held(P.points, held_idx, held_w, d)
    return _finish(held_idx, held_w * total, total)


def fast_caratheodory(P: WeightedSet, k: Optional[int] = None) -> ConvexCombination:
    """Block-mean booster around :func:`caratheodory`.

    Each pass splits the surviving points (in index order) into ``k``
    contiguous blocks of near-equal size, reduces the weighted block means
    to at most ``d + 1`` blocks and keeps only their points, reweighted by
    the block's new share. Passes repeat until ``d + 1`` points remain.
    ``k`` defaults to ``2d`` and is raised to ``d + 2`` when smaller, since
    fewer blocks than that cannot shrink anything.
    """
    w, total = _validate(P)
    d = P.d
    if k is None:
        k = 2 * d
    if k < 2:
        raise InputError(f"cluster count must be at least 2, got {k}")
    k_eff = max(k, d + 2)
    idx = np.flatnonzero(w > 0)
    if idx.size <= d + 1:
        return ConvexCombination(idx, w[idx].copy())
    u = w[idx] / total
    points = P.points
    while idx.size > d + 1:
        n_blocks = min(k_eff, idx.size)
        bounds = np.linspace(0, idx.size, n_blocks + 1).round().astype(int)
        starts = bounds[:-1]
        block_w = np.add.reduceat(u, starts)
        block_sum = np.add.reduceat(points[idx] * u[:, None], starts, axis=0)
        means = block_sum / block_w[:, None]
        chosen = _caratheodory_core(
            means, block_w, np.arange(n_blocks), float(np.sum(block_w))
        )
        new_idx = []
        new_u = []
        for b, bw in zip(chosen.indices, chosen.weights):
            lo, hi = bounds[b], bounds[b + 1]
            new_idx.append(idx[lo:hi])
            new_u.append(u[lo:hi] * (bw / block_w[b]))
        idx = np.concatenate(new_idx)
        u = np.concatenate(new_u)
        order = np.argsort(idx, kind="stable")
        idx, u = idx[order], u[order]
        pos = u > DROP_RTOL
        idx, u = idx[pos], u[pos]
    return _finish(idx, u * total, total)
