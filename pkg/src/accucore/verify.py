"""Checking a summary against its input on seeded random queries.

Queries come from a counter-based generator (``numpy.random.Philox``) keyed
by one integer seed, so the same seed gives the same queries on every
platform. Point queries are standard normal, matrix-norm queries are unit
vectors and segment queries have standard-normal intercept and slope.
"""

from __future__ import annotations

from typing import Union

import numpy as np

from .core import (
    SegmentQuery,
    WeightedSet,
    eval_lms,
    eval_max_distance,
    eval_quadratic_form,
    eval_segment_loss,
    eval_sq_dist_sum,
    eval_weighted_sum,
)
from .coresets import KINDS, MomentSummary, size_bound

REL_TOL = 1e-8
ABS_FLOOR = 1e-12


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator for ``seed`` (any nonnegative integer)."""
    return np.random.Generator(np.random.Philox(int(seed)))


def _family(kind: str) -> str:
    size_bound(kind, 1)
    return kind.rsplit("-", 1)[0] if kind[-1].isdigit() else kind


def sample_queries(kind: str, data_cols: int, count: int, seed: int) -> list:
    """``count`` queries suited to ``kind`` for data with ``data_cols`` columns."""
    family = _family(kind)
    rng = make_rng(seed)
    if family == "one-segment":
        d = data_cols - 1
        return [SegmentQuery(rng.standard_normal(d), rng.standard_normal(d)) for _ in range(count)]
    if family == "lms":
        return [rng.standard_normal(data_cols - 1) for _ in range(count)]
    if family == "matrix-norm":
        out = []
        for _ in range(count):
            x = rng.standard_normal(data_cols)
            out.append(x / np.linalg.norm(x))
        return out
    return [rng.standard_normal(data_cols) for _ in range(count)]


def loss(kind: str, data: Union[WeightedSet, MomentSummary], query):
    """The loss that ``kind`` preserves, evaluated on ``data``."""
    family = _family(kind)
    if isinstance(data, MomentSummary):
        return data.cost(query)
    if family == "one-center":
        return eval_max_distance(data, query)
    if family == "vectors-sum":
        return eval_weighted_sum(data, query)
    if family == "one-mean":
        return eval_sq_dist_sum(data, query)
    if family == "one-segment":
        return eval_segment_loss(data, query)
    if family == "matrix-norm":
        return eval_quadratic_form(data, query)
    return eval_lms(data, query)


def relative_error(full, summary) -> float:
    """``|full - summary| / max(|full|, ABS_FLOOR)``; Euclidean norms for vectors."""
    full = np.asarray(full, dtype=float)
    diff = np.linalg.norm(np.atleast_1d(full - np.asarray(summary, dtype=float)))
    return float(diff / max(np.linalg.norm(np.atleast_1d(full)), ABS_FLOOR))


def max_relative_error(kind, P: WeightedSet, summary, n_queries: int = 50, seed: int = 0) -> float:
    """Largest relative loss gap between ``P`` and ``summary`` over sampled queries."""
    worst = 0.0
    for q in sample_queries(kind, P.d, n_queries, seed):
        worst = max(worst, relative_error(loss(kind, P, q), loss(kind, summary, q)))
    return worst


__all__ = [
    "KINDS",
    "REL_TOL",
    "ABS_FLOOR",
    "make_rng",
    "sample_queries",
    "loss",
    "relative_error",
    "max_relative_error",
]
