"""Dense least-squares kernels.

Least squares, pseudoinverse and orthogonal projectors all go through a
Householder QR with column pivoting (``scipy.linalg.qr``). Non-negative and
inequality-constrained least squares are active-set solvers built on top.

Matrices are plain 2-D ``numpy`` arrays of float64 in whatever memory order
the caller hands in; nothing here depends on the layout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

_EPS = np.finfo(float).eps


class LinAlgError(ValueError):
    """Raised for dimension mismatches, non-finite data or rank deficiency."""


class RankDeficientError(LinAlgError):
    def __init__(self, rank: int, cols: int):
        super().__init__(f"matrix is rank deficient: numerical rank {rank} < {cols} columns")
        self.rank = rank
        self.cols = cols


class IterationLimitError(RuntimeError):
    """Active-set iteration cap hit; ``best`` carries the last iterate."""

    def __init__(self, message: str, best: "LeastSquaresResult"):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class LeastSquaresResult:
    solution: np.ndarray
    residual_norm: float
    rank_deficient: bool = False


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise LinAlgError(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise LinAlgError("matrix has non-finite entries")
    return A


def _as_rhs(A: np.ndarray, b) -> np.ndarray:
    b = np.asarray(b, dtype=float).ravel()
    if b.shape[0] != A.shape[0]:
        raise LinAlgError(f"dimension mismatch: A has {A.shape[0]} rows, b has {b.shape[0]}")
    if not np.all(np.isfinite(b)):
        raise LinAlgError("right-hand side has non-finite entries")
    return b


def rank_tolerance(A: np.ndarray) -> float:
    """Pivot threshold ``max(rows, cols) * eps * max column norm``."""
    norms = np.sqrt(np.einsum("ij,ij->j", A, A))
    return max(A.shape) * _EPS * float(norms.max(initial=0.0))


def _pivoted_qr(A: np.ndarray):
    Q, R, piv = sla.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.count_nonzero(diag > rank_tolerance(A)))
    return Q, R, piv, rank


def solve_ls(A, b) -> LeastSquaresResult:
    """Minimum-norm least-squares solution of ``A x ~= b``.

    Full-rank problems are a triangular solve after pivoted QR. When the
    numerical rank ``r`` is below the column count, the leading ``r`` rows of
    ``R`` are reduced once more (complete orthogonal decomposition) so that the
    returned solution has the smallest l2 norm among all minimizers.
    """
    A = _as_matrix(A)
    b = _as_rhs(A, b)
    n = A.shape[1]
    Q, R, piv, rank = _pivoted_qr(A)
    qtb = Q.T @ b
    x = np.zeros(n)
    if rank == n:
        x[piv] = sla.solve_triangular(R[:n, :n], qtb[:n])
    elif rank > 0:
        # R[:r, :] = [R11 R12]; take its transpose QR to get [T 0] Z^T.
        Z, T = sla.qr(R[:rank, :].T, mode="economic")
        w = sla.solve_triangular(T.T, qtb[:rank], lower=True)
        x[piv] = Z @ w
    resid = float(np.linalg.norm(b - A @ x))
    return LeastSquaresResult(x, resid, rank < n)


def _full_rank_qr(A: np.ndarray):
    Q, R, piv, rank = _pivoted_qr(A)
    if rank < A.shape[1]:
        raise RankDeficientError(rank, A.shape[1])
    return Q, R, piv


def pseudoinverse(A) -> np.ndarray:
    """``(A^T A)^{-1} A^T`` for a full-column-rank ``A``."""
    A = _as_matrix(A)
    Q, R, piv = _full_rank_qr(A)
    n = A.shape[1]
    pinv = np.empty((n, A.shape[0]))
    pinv[piv] = sla.solve_triangular(R[:n, :n], Q[:, :n].T)
    return pinv


def orthogonal_projector(D1) -> np.ndarray:
    """Projector onto the orthogonal complement of ``range(D1)``."""
    D1 = _as_matrix(D1)
    Q, _, _ = _full_rank_qr(D1)
    P = np.eye(D1.shape[0]) - Q @ Q.T
    return 0.5 * (P + P.T)


def default_kkt_tol(A: np.ndarray, b: np.ndarray) -> float:
    scale = float(np.max(np.abs(A.T @ b), initial=0.0))
    return 1e-10 * scale if scale > 0 else 1e-14


def nnls_solve(A, b, tol: float | None = None, max_iter: int | None = None) -> LeastSquaresResult:
    """Lawson-Hanson active-set NNLS: ``min ||b - A x||`` s.t. ``x >= 0``.

    ``tol`` is the KKT tolerance on the gradient ``A^T (b - A x)``; it
    defaults to ``1e-10 * ||A^T b||_inf``. Raises ``IterationLimitError``
    after ``max_iter`` (default ``3 * cols``) outer iterations.
    """
    A = _as_matrix(A)
    b = _as_rhs(A, b)
    m, n = A.shape
    if tol is None:
        tol = default_kkt_tol(A, b)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter is None:
        max_iter = 3 * n

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    w = A.T @ b
    it = 0
    while True:
        cand = np.where(passive, -np.inf, w)
        j = int(np.argmax(cand))
        if passive.all() or cand[j] <= tol:
            break
        if it >= max_iter:
            best = LeastSquaresResult(x, float(np.linalg.norm(b - A @ x)))
            raise IterationLimitError(f"NNLS did not converge in {max_iter} iterations", best)
        it += 1
        passive[j] = True
        while True:
            idx = np.flatnonzero(passive)
            z = np.zeros(n)
            z[idx] = solve_ls(A[:, idx], b).solution
            if np.all(z[idx] > 0):
                x = z
                break
            # Step back along x -> z until the first passive coordinate hits zero.
            neg = idx[z[idx] <= 0]
            ratios = x[neg] / (x[neg] - z[neg])
            k = int(np.argmin(ratios))
            x = x + ratios[k] * (z - x)
            x[neg[k]] = 0.0
            passive &= x > 0
            x[~passive] = 0.0
            if not passive.any():
                break
        w = A.T @ (b - A @ x)
    return LeastSquaresResult(x, float(np.linalg.norm(b - A @ x)))


def lsi_solve(G1, y, nonneg_count: int, tol: float | None = None) -> LeastSquaresResult:
    """Least squares with the first ``nonneg_count`` coefficients kept >= 0.

    The unconstrained block is eliminated through its orthogonal projector,
    leaving an NNLS problem in the constrained block; the unconstrained
    coefficients are then recovered by back substitution.
    """
    G1 = _as_matrix(G1)
    y = _as_rhs(G1, y)
    n = G1.shape[1]
    if not 0 <= nonneg_count <= n:
        raise ValueError(f"nonneg_count must lie in [0, {n}]")
    _, _, _, rank = _pivoted_qr(G1)
    if rank < n:
        raise RankDeficientError(rank, n)
    if nonneg_count == 0:
        return solve_ls(G1, y)

    Gx, Gd = G1[:, :nonneg_count], G1[:, nonneg_count:]
    if Gd.shape[1]:
        Qd, _, _ = _full_rank_qr(Gd)
        Gx_t = Gx - Qd @ (Qd.T @ Gx)
        y_t = y - Qd @ (Qd.T @ y)
    else:
        Gx_t, y_t = Gx, y
    alpha = nnls_solve(Gx_t, y_t, tol=tol).solution
    delta = np.empty(n)
    delta[:nonneg_count] = alpha
    if Gd.shape[1]:
        delta[nonneg_count:] = solve_ls(Gd, y - Gx @ alpha).solution
    if not np.all(np.isfinite(delta)):
        raise LinAlgError("LSI produced a non-finite iterate")
    return LeastSquaresResult(delta, float(np.linalg.norm(y - G1 @ delta)))


def lsi_kkt_violation(G1, y, delta, nonneg_count: int) -> float:
    """Largest KKT violation of an LSI candidate (0 when optimal)."""
    G1 = np.asarray(G1, dtype=float)
    grad = G1.T @ (np.asarray(y, dtype=float) - G1 @ delta)
    k = nonneg_count
    free = np.ones(len(delta), dtype=bool)
    free[:k] = delta[:k] > 0
    viol = [np.abs(grad[free]).max(initial=0.0), grad[:k][~free[:k]].max(initial=0.0)]
    viol.append((-delta[:k]).max(initial=0.0))
    return float(max(viol))
