"""l1 pursuit through a non-negative homotopy path.

All three programs reduce to one non-negative LASSO path:

* NN-BP on ``X`` runs the path on ``X`` directly;
* BP on ``G`` runs it on ``[G, -G]`` and folds ``delta = p - n``;
* COMB-BP on ``[X | D]`` runs it on ``[X, D, -D]`` and folds the D halves.

The path stops once ``||y - A x||_2 <= residual_tol``. Every active
coefficient is then still shrunk by about ``lam``, which matters when the
signal itself is tiny. So when the stopped active set spans ``y`` exactly,
the current path segment is followed to its ``lam -> 0`` end (the
least-squares fit on that set), after checking that the end keeps its signs
and that no inactive atom would join on the way. That end point solves the
equality-constrained program exactly. ``finish_segment=False`` keeps the
point at the residual target, as wanted when the target is a noise level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from . import _backend
from ._pykernels import CAP, LAMBDA_ZERO, RESIDUAL, STALLED
from .dictgen import CombinedDictionary, Dictionary
from .solution import SparseSolution, Termination, make_solution

# ``y`` counts as inside the span of the active atoms when the least-squares
# residual is below this fraction of ``||y||``.
SPAN_RTOL = 1e-10
# Slack on the inactive-correlation test ``a_j^T w <= 1`` of the last segment.
JOIN_SLACK = 1e-8

_STATUS = {RESIDUAL: Termination.RESIDUAL, STALLED: Termination.STALLED, LAMBDA_ZERO: Termination.STALLED}


class PathLimitError(RuntimeError):
    """Breakpoint cap reached; ``partial`` holds the solution at the last breakpoint."""

    def __init__(self, message: str, partial: SparseSolution):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class PathSolverConfig:
    residual_tol: float = 1e-6
    max_breakpoints: int | None = None  # default 4 * min(M, K)
    kkt_tol: float = 1e-6
    finish_segment: bool = True

    def __post_init__(self):
        if self.residual_tol <= 0 or self.kkt_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_breakpoints is not None and self.max_breakpoints <= 0:
            raise ValueError("max_breakpoints must be positive")

    def cap(self, M: int, K: int) -> int:
        return self.max_breakpoints if self.max_breakpoints is not None else 4 * min(M, K)


def _matrix(A) -> np.ndarray:
    if isinstance(A, CombinedDictionary):
        return A.G.matrix
    if isinstance(A, Dictionary):
        return A.matrix
    return Dictionary(A).matrix


def _signal(A: np.ndarray, y) -> np.ndarray:
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != A.shape[0]:
        raise ValueError(f"signal length {y.shape[0]} != dictionary rows {A.shape[0]}")
    if not np.all(np.isfinite(y)):
        raise ValueError("signal has non-finite entries")
    return y


def _run_path(A: np.ndarray, y: np.ndarray, cfg: PathSolverConfig, cap_k: int, trace=None):
    cap = cfg.cap(A.shape[0], cap_k)
    x, lam, rnorm, nb, status = _backend.kernels().nn_homotopy(A, y, cfg.residual_tol, cap, trace)
    # atoms about to leave the active set may sit at -1e-17 after the last step
    np.maximum(x, 0.0, out=x)
    if status == RESIDUAL and cfg.finish_segment:
        end = _segment_end(A, y, x)
        if end is not None:
            x, lam = end, 0.0
            rnorm = float(np.linalg.norm(y - A @ x))
    return x, lam, rnorm, nb, status


def _segment_end(A: np.ndarray, y: np.ndarray, x: np.ndarray) -> np.ndarray | None:
    """The ``lam -> 0`` end of the path segment through ``x``, or ``None``.

    On the segment ``x_I(lam) = x_ls - lam (A_I^T A_I)^{-1} 1`` and, when
    ``A_I x_ls = y``, ``r(lam) = lam w`` with ``w = A_I (A_I^T A_I)^{-1} 1``.
    Inactive correlations are then ``lam a_j^T w``, so no atom joins iff
    ``a_j^T w <= 1``; no atom drops iff ``x_ls >= 0`` (the segment is linear
    and starts feasible).
    """
    act = np.flatnonzero(x > 0)
    if act.size == 0 or act.size > A.shape[0]:
        return None
    Q, R = np.linalg.qr(A[:, act])
    diag = np.abs(np.diag(R))
    if diag.min() <= 1e-12 * diag.max():
        return None
    x_ls = np.linalg.solve(R, Q.T @ y)
    if np.any(x_ls < 0) or np.linalg.norm(y - Q @ (Q.T @ y)) > SPAN_RTOL * np.linalg.norm(y):
        return None
    w = Q @ np.linalg.solve(R.T, np.ones(act.size))
    off = np.ones(A.shape[1], dtype=bool)
    off[act] = False
    if np.any(A[:, off].T @ w > 1.0 + JOIN_SLACK):
        return None
    out = np.zeros_like(x)
    out[act] = x_ls
    return out


def _finish(delta, split, lam, rnorm, nb, status, msg) -> SparseSolution:
    if status == CAP:
        partial = make_solution(delta, split, rnorm, nb, Termination.MAX_ITERS, lam=lam)
        raise PathLimitError(msg, partial)
    return make_solution(delta, split, rnorm, nb, _STATUS[status], lam=lam)


def nn_homotopy_solve(A, y, cfg: PathSolverConfig = PathSolverConfig(), trace=None) -> SparseSolution:
    """``min 1^T a`` s.t. ``y = A a``, ``a >= 0`` (to residual tolerance)."""
    A = _matrix(A)
    y = _signal(A, y)
    x, lam, rnorm, nb, status = _run_path(A, y, cfg, A.shape[1], trace)
    return _finish(x, A.shape[1], lam, rnorm, nb, status, f"homotopy exceeded {cfg.cap(*A.shape)} breakpoints")


def _fold(x: np.ndarray, kx: int, kd: int) -> np.ndarray:
    return np.concatenate([x[:kx], x[kx : kx + kd] - x[kx + kd :]])


def comb_bp_solve(G: CombinedDictionary, y, cfg: PathSolverConfig = PathSolverConfig(), trace=None) -> SparseSolution:
    """``min ||delta||_1`` s.t. ``y = G delta`` with the X block non-negative."""
    if not isinstance(G, CombinedDictionary):
        raise TypeError("comb_bp_solve needs a CombinedDictionary")
    A = G.G.matrix
    y = _signal(A, y)
    kx, kd = G.kx, G.kd
    aug = np.hstack([A, -A[:, kx:]])
    x, lam, rnorm, nb, status = _run_path(aug, y, cfg, A.shape[1], trace)
    delta = _fold(x, kx, kd)
    if status == CAP:
        partial = make_solution(delta, kx, rnorm, nb, Termination.MAX_ITERS, lam=lam)
        raise PathLimitError(f"homotopy exceeded {cfg.cap(*A.shape)} breakpoints", partial)
    sol = make_solution(delta, kx, rnorm, nb, _STATUS[status], lam=lam)
    sol.extras["augmented"] = x
    return sol


def bp_solve(G, y, cfg: PathSolverConfig = PathSolverConfig(), trace=None) -> SparseSolution:
    """Basis pursuit ``min ||delta||_1`` s.t. ``y = G delta``."""
    A = _matrix(G)
    return comb_bp_solve(CombinedDictionary(Dictionary(A), 0), y, cfg, trace)


def _dual_certificate_gap(A: np.ndarray, kx: int, act: np.ndarray, signs: np.ndarray) -> float:
    """Smallest ``t >= 0`` admitting ``v`` with ``A_S^T v = s`` and inactive
    correlations ``x_j^T v <= 1 + t``, ``|d_j^T v| <= 1 + t``.

    ``t = 0`` is the LP dual certificate that the support and signs solve the
    sign-constrained l1 program for the fit ``A delta``. Returns ``inf`` when
    the equality system has no solution.
    """
    M, K = A.shape
    off = np.setdiff1d(np.arange(K), act)
    off_x, off_d = off[off < kx], off[off >= kx]
    rows = [A[:, off_x].T, A[:, off_d].T, -A[:, off_d].T]
    G_ub = np.vstack(rows) if off.size else np.zeros((0, M))
    n_ub = G_ub.shape[0]
    cost = np.zeros(M + 1)
    cost[-1] = 1.0
    res = linprog(
        cost,
        A_ub=np.hstack([G_ub, -np.ones((n_ub, 1))]) if n_ub else None,
        b_ub=np.ones(n_ub) if n_ub else None,
        A_eq=np.hstack([A[:, act].T, np.zeros((act.size, 1))]),
        b_eq=signs,
        bounds=[(None, None)] * M + [(0, None)],
        method="highs",
    )
    if res.status == 0:
        return float(res.x[-1])
    if res.status == 2:
        return float("inf")
    raise RuntimeError(f"dual certificate LP failed: {res.message}")


def verify_kkt(G, y, delta, tol: float = 1e-6) -> tuple[bool, float]:
    """Certify ``delta`` as an optimum of the sign-constrained l1 program.

    Two independent checks, both required:

    * the LASSO optimality system at the level
      ``lam = mean(s_i * g_i^T r)`` over the active set: active correlations
      equal ``lam`` times the coefficient sign, inactive X-block correlations
      are ``<= lam`` and inactive D-block correlations ``<= lam`` in
      magnitude. This ties ``delta`` to the residual ``y - G delta``;
    * an LP dual certificate ``v`` with ``g_i^T v = s_i`` on the active set
      and inactive correlations within ``[-1, 1]`` (``<= 1`` on X). This
      proves ``delta`` has the least l1 norm among sign-feasible vectors with
      the same fit, and it stays meaningful as ``lam -> 0``, where the first
      check alone accepts any exact representation.

    Returns ``(certified, worst_violation)``.
    """
    if isinstance(G, CombinedDictionary):
        A, kx = G.G.matrix, G.kx
    else:
        A, kx = _matrix(G), 0
    y = _signal(A, y)
    delta = np.asarray(delta, dtype=float)
    c = A.T @ (y - A @ delta)
    act = np.flatnonzero(delta)
    sign_viol = float(np.max(-delta[:kx], initial=0.0))
    if act.size:
        s = np.sign(delta[act])
        lam = float(np.mean(s * c[act]))
        viol = [np.max(np.abs(s * c[act] - lam)), max(-lam, 0.0)]
        viol.append(_dual_certificate_gap(A, kx, act, s))
    else:
        lam = float(max(np.max(c[:kx], initial=0.0), np.max(np.abs(c[kx:]), initial=0.0)))
        viol = [0.0]
    off = np.ones(A.shape[1], dtype=bool)
    off[act] = False
    viol.append(np.max(c[:kx][off[:kx]] - lam, initial=0.0))
    viol.append(np.max(np.abs(c[kx:][off[kx:]]) - lam, initial=0.0))
    viol.append(sign_viol)
    worst = float(max(viol))
    return worst <= tol, worst
