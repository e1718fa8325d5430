"""Least-mean-squares objectives and closed-form solvers.

Data are weighted rows ``(a | b)``: features then a label. Every objective
has the form ``g(sum w (a^T x - b)^2) + h(x)``, so it takes the same value
on an LMS coreset as on the full data.

==============  ====================  ==========================================
kind            g(y)                  h(x)
==============  ====================  ==========================================
linear          y                     0
ridge           y                     alpha |x|_2^2
lasso           y / (2 n)             alpha |x|_1
elastic_net     y / (2 n)             rho alpha |x|_2^2 + (1 - rho) alpha |x|_1 / 2
==============  ====================  ==========================================

``n`` is the row count of the original data, not of the coreset.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import DimensionError, InputError, WeightError, WeightedSet, eval_lms
from .linalg import lstsq

OBJECTIVE_KINDS = ("linear", "ridge", "lasso", "elastic_net")


@dataclass(frozen=True)
class LmsObjectiveSpec:
    """Which objective to evaluate and its regularization parameters.

    ``n_for_scaling`` sets the ``1/(2n)`` factor of lasso and elastic net;
    when None the row count of the data passed to :func:`lms_objective` is
    used, which is only right for the full data set.
    """

    kind: str = "linear"
    alpha: float = 0.0
    rho: float = 0.5
    n_for_scaling: Optional[int] = None

    def __post_init__(self):
        if self.kind not in OBJECTIVE_KINDS:
            raise InputError(f"unknown objective {self.kind!r}; expected one of {OBJECTIVE_KINDS}")
        if not (np.isfinite(self.alpha) and self.alpha >= 0):
            raise InputError(f"alpha must be finite and >= 0, got {self.alpha!r}")
        if not 0.0 <= self.rho <= 1.0:
            raise InputError(f"rho must lie in [0, 1], got {self.rho!r}")
        if self.n_for_scaling is not None and self.n_for_scaling < 1:
            raise InputError(f"n_for_scaling must be >= 1, got {self.n_for_scaling!r}")


def _split(data: WeightedSet):
    if data.d < 2:
        raise DimensionError("LMS data needs at least one feature and a label column")
    if np.any(data.weights < 0):
        raise WeightError("LMS weights must be nonnegative")
    root = np.sqrt(data.weights)
    return root[:, None] * data.points[:, :-1], root * data.points[:, -1]


def lms_objective(data: WeightedSet, x, spec: LmsObjectiveSpec = LmsObjectiveSpec()) -> float:
    """Value of ``spec``'s objective at ``x``."""
    sq = eval_lms(data, x)
    x = np.asarray(x, dtype=float).reshape(-1)
    if spec.kind == "linear":
        return sq
    if spec.kind == "ridge":
        return sq + spec.alpha * float(x @ x)
    n = data.n if spec.n_for_scaling is None else spec.n_for_scaling
    l1 = float(np.sum(np.abs(x)))
    if spec.kind == "lasso":
        return sq / (2.0 * n) + spec.alpha * l1
    return (
        sq / (2.0 * n)
        + spec.rho * spec.alpha * float(x @ x)
        + (1.0 - spec.rho) * spec.alpha * l1 / 2.0
    )


def solve_linear(data: WeightedSet) -> np.ndarray:
    """Minimum-norm minimizer of ``sum w (a^T x - b)^2``."""
    A, b = _split(data)
    return lstsq(A, b)


def solve_ridge(data: WeightedSet, alpha: float) -> np.ndarray:
    """Minimizer of ``sum w (a^T x - b)^2 + alpha |x|^2`` (``alpha > 0``).

    Solved as least squares on ``A`` stacked over ``sqrt(alpha) I``.
    """
    if not (np.isfinite(alpha) and alpha > 0):
        raise InputError(f"ridge needs alpha > 0, got {alpha!r}")
    A, b = _split(data)
    d = A.shape[1]
    return lstsq(np.vstack([A, np.sqrt(alpha) * np.eye(d)]), np.concatenate([b, np.zeros(d)]))
