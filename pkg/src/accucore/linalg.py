"""Dense linear algebra used by the constructions.

Householder QR (plain and column-pivoted), a one-sided Jacobi thin SVD,
null-space vectors of wide matrices, the reflection that maps a vector onto
the all-equal direction, and minimum-norm least squares. Everything is
written on top of numpy array arithmetic only; ``numpy.linalg`` is used by
the tests as an independent reference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DimensionError, InputError

RANK_RTOL = 1e-12
_JACOBI_MAX_SWEEPS = 60


@dataclass(frozen=True, eq=False)
class QRFactors:
    Q: np.ndarray
    R: np.ndarray


@dataclass(frozen=True, eq=False)
class PivotedQR:
    Q: np.ndarray
    R: np.ndarray
    perm: np.ndarray
    rank: int


@dataclass(frozen=True, eq=False)
class ThinSVDFactors:
    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray

    @property
    def r(self) -> int:
        return self.singular_values.size

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.singular_values) @ self.V.T


def _finite_matrix(A, name="A") -> np.ndarray:
    A = np.array(A, dtype=float)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if A.ndim != 2:
        raise DimensionError(f"{name} must be 2-D")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise DimensionError(f"{name} is empty: shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InputError(f"{name} contains NaN or Inf")
    return A


def _house(x: np.ndarray):
    """Householder vector ``v`` (v[0] == 1) and ``beta`` with
    ``(I - beta v v^T) x = -sign(x0) ||x|| e1``. ``beta == 0`` for ``x == 0``.
    """
    norm = np.linalg.norm(x)
    v = x.copy()
    if norm == 0.0:
        v[:] = 0.0
        v[0] = 1.0
        return v, 0.0, 0.0
    alpha = -norm if x[0] >= 0 else norm
    v[0] = x[0] - alpha
    v /= v[0]
    beta = 2.0 / (v @ v)
    return v, beta, alpha


def _householder_rows(X: np.ndarray, steps: int):
    """In-place Householder triangularization of ``X.T``.

    ``X`` is ``c x m`` and is interpreted as the transpose of the ``m x c``
    matrix being factored, so each reflector touches contiguous rows.
    Returns the reflectors ``[(v, beta), ...]`` (``v`` acts on entries k:).
    """
    reflectors = []
    for k in range(steps):
        v, beta, alpha = _house(X[k, k:])
        if beta != 0.0:
            X[k, k:] = 0.0
            X[k, k] = alpha
            if k + 1 < X.shape[0]:
                tail = X[k + 1 :, k:]
                tail -= np.outer(beta * (tail @ v), v)
        reflectors.append((v, beta))
    return reflectors


def _apply_reflectors(reflectors, y: np.ndarray) -> np.ndarray:
    """Compute ``H_1 H_2 ... H_k y``."""
    y = y.copy()
    for k in range(len(reflectors) - 1, -1, -1):
        v, beta = reflectors[k]
        if beta != 0.0:
            seg = y[k:]
            seg -= beta * (v @ seg) * v if seg.ndim == 1 else np.outer(v, beta * (v @ seg))
    return y


def qr(A) -> QRFactors:
    """Full Householder QR ``A = Q R`` of an ``m x n`` matrix with ``m >= n``.

    ``Q`` is ``m x m`` orthogonal and ``R`` is ``m x n`` upper triangular.
    """
    A = _finite_matrix(A)
    m, n = A.shape
    if m < n:
        raise DimensionError(f"qr needs m >= n, got {m} x {n}")
    X = A.T.copy()
    reflectors = _householder_rows(X, min(n, m - 1) if m > 1 else 0)
    R = np.zeros((m, n))
    R[:n, :] = np.triu(X.T[:n, :])
    Q = _apply_reflectors(reflectors, np.eye(m))
    return QRFactors(Q, R)


def qr_pivoted(A, rtol: float = RANK_RTOL) -> PivotedQR:
    """Householder QR with column pivoting, ``A[:, perm] = Q R``.

    Works for any shape. Pivoting stops once the largest remaining column
    norm drops to ``max(m, n) * rtol * |R[0, 0]|``; that step count is
    reported as ``rank``. The leading ``rank`` pivots index a well-conditioned
    basis of the column space of ``A``. Only the first ``rank`` columns of
    ``R`` are triangular.
    """
    A = _finite_matrix(A)
    m, n = A.shape
    X = A.T.copy()
    perm = np.arange(n)
    reflectors = []
    steps = min(m, n)
    cutoff = None
    rank = 0
    for k in range(steps):
        # recompute the remaining norms each step; n and m are small here
        rem = np.sum(X[k:, k:] ** 2, axis=1)
        j = k + int(np.argmax(rem))
        if j != k:
            X[[k, j]] = X[[j, k]]
            perm[[k, j]] = perm[[j, k]]
        top = np.sqrt(rem[j - k])
        if cutoff is None:
            cutoff = max(m, n) * rtol * top
        if top <= cutoff or top == 0.0:
            break
        v, beta, alpha = _house(X[k, k:])
        X[k, k:] = 0.0
        X[k, k] = alpha
        if k + 1 < n:
            tail = X[k + 1 :, k:]
            tail -= np.outer(beta * (tail @ v), v)
        reflectors.append((v, beta))
        rank += 1
    # rows past ``rank`` keep the unreduced residual so that A[:, perm] = Q R
    R = X.T.copy()
    R[:, :rank] = np.triu(R[:, :rank])
    Q = _apply_reflectors(reflectors, np.eye(m))
    return PivotedQR(Q, R, perm, rank)


def _jacobi_square(R: np.ndarray):
    """One-sided Jacobi on the columns of a small square-ish matrix.

    Returns ``W = R V`` (mutually orthogonal columns) and orthogonal ``V``.
    """
    W = R.copy()
    n = W.shape[1]
    V = np.eye(n)
    tol = np.finfo(float).eps * max(n, 1)
    for _ in range(_JACOBI_MAX_SWEEPS):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                wi = W[:, i]
                wj = W[:, j]
                alpha = wi @ wi
                beta = wj @ wj
                gamma = wi @ wj
                if gamma == 0.0 or abs(gamma) <= tol * np.sqrt(alpha * beta):
                    continue
                with np.errstate(over="ignore"):
                    zeta = (beta - alpha) / (2.0 * gamma)
                if not np.isfinite(zeta):
                    # rotation angle below double resolution
                    continue
                rotated = True
                if abs(zeta) > 1e150:
                    t = 0.5 / zeta
                else:
                    t = np.copysign(1.0, zeta) / (abs(zeta) + np.hypot(1.0, zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                W[:, [i, j]] = W[:, [i, j]] @ np.array([[c, s], [-s, c]])
                V[:, [i, j]] = V[:, [i, j]] @ np.array([[c, s], [-s, c]])
        if not rotated:
            break
    return W, V


def thin_svd(A, rtol: float = RANK_RTOL) -> ThinSVDFactors:
    """Rank-revealing thin SVD ``A = U diag(s) V^T``.

    Tall inputs are first reduced by Householder QR and the small triangular
    factor is diagonalized by one-sided Jacobi rotations. Singular values at
    or below ``max(m, n) * s[0] * rtol`` are treated as zero and dropped, so
    ``r`` is the numerical rank. A zero matrix yields ``r == 0``.
    """
    A = _finite_matrix(A)
    m, n = A.shape
    if m < n:
        f = thin_svd(A.T, rtol=rtol)
        return ThinSVDFactors(f.V, f.singular_values, f.U)

    if m > n:
        X = A.T.copy()
        reflectors = _householder_rows(X, n)
        R = np.triu(X.T[:n, :])
    else:
        reflectors = None
        R = A.copy()

    W, V = _jacobi_square(R)
    s = np.sqrt(np.sum(W**2, axis=0))
    order = np.argsort(-s, kind="stable")
    s = s[order]
    W = W[:, order]
    V = V[:, order]
    if s.size == 0 or s[0] == 0.0:
        r = 0
    else:
        r = int(np.sum(s > max(m, n) * s[0] * rtol))
    s = s[:r]
    Ur = W[:, :r] / s
    V = V[:, :r]
    if r:
        # one re-orthogonalization pass; columns with small s lose orthogonality
        q = qr(Ur) if Ur.shape[0] >= Ur.shape[1] else None
        if q is not None:
            signs = np.sign(np.diag(q.R)[:r])
            signs[signs == 0] = 1.0
            Ur = q.Q[:, :r] * signs

    if reflectors is not None:
        U = np.zeros((m, r))
        U[:n, :] = Ur
        U = _apply_reflectors(reflectors, U)
    else:
        U = Ur
    return ThinSVDFactors(U, s, V)


def null_space_vector(A) -> np.ndarray:
    """Unit vector ``v`` with ``A v = 0`` for a wide ``d x m`` matrix (m > d).

    Householder-triangularizes ``A^T``; column ``d`` of the orthogonal factor
    is orthogonal to every row of ``A``. Cost is ``O(m d^2)``.
    """
    A = _finite_matrix(A)
    d, m = A.shape
    if m <= d:
        raise DimensionError(f"need more columns than rows, got {d} x {m}")
    X = A.copy()
    reflectors = _householder_rows(X, d)
    e = np.zeros(m)
    e[d] = 1.0
    v = _apply_reflectors(reflectors, e)
    return v / np.linalg.norm(v)


def rotation_to_uniform(u):
    """Orthogonal ``Z`` with ``Z u = (sqrt(c), ..., sqrt(c))`` where
    ``c = ||u||^2 / k``.

    ``Z`` is a single Householder reflection, negated when that keeps the
    reflector vector well away from zero (``u`` close to the target).

    Returns
    -------
    Z : (k, k) ndarray
    c : float
    """
    u = np.array(u, dtype=float).reshape(-1)
    if not np.all(np.isfinite(u)):
        raise InputError("u contains NaN or Inf")
    k = u.size
    scale = float(np.max(np.abs(u)))
    if scale == 0.0:
        raise InputError("cannot rotate the zero vector")
    # work with u / max|u| so tiny or huge vectors do not under/overflow
    unit = u / scale
    sq = float(unit @ unit)
    c = sq / k * scale * scale
    target = np.full(k, np.sqrt(sq / k))
    if unit @ target > 0:
        # reflect onto -target, then negate: avoids cancellation in u - target
        v = unit + target
        Z = -(np.eye(k) - (2.0 / (v @ v)) * np.outer(v, v))
    else:
        v = unit - target
        Z = np.eye(k) - (2.0 / (v @ v)) * np.outer(v, v)
    return Z, c


def lstsq(A, b, rtol: float = RANK_RTOL) -> np.ndarray:
    """Minimum-norm least-squares solution ``x = V diag(1/s) U^T b``."""
    A = _finite_matrix(A)
    b = np.array(b, dtype=float)
    if b.ndim != 1:
        b = b.reshape(-1)
    if b.shape[0] != A.shape[0]:
        raise DimensionError(f"A has {A.shape[0]} rows, b has {b.shape[0]} entries")
    if not np.all(np.isfinite(b)):
        raise InputError("b contains NaN or Inf")
    f = thin_svd(A, rtol=rtol)
    if f.r == 0:
        return np.zeros(A.shape[1])
    return f.V @ ((f.U.T @ b) / f.singular_values)
