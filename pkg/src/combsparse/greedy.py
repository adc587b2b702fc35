"""Greedy pursuit: OMP, non-negative OMP and combined OMP.

COMB-OMP ranks the X-block atoms by their positive correlation with the
residual and the D-block atoms by absolute correlation, then takes the
larger of the two winners. Ties go to the lowest index, and to the X block
when the two winners tie.

The default (unconstrained least-squares update, no debiasing) runs in the
compiled kernel when available. The sign-constrained update re-solves an
LSI problem on the current support each iteration and runs in Python.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .dictgen import CombinedDictionary, Dictionary
from .linalg import LinAlgError, lsi_solve, nnls_solve
from .solution import SparseSolution, StoppingCriteria, Termination, make_solution

_STATUS = {0: Termination.RESIDUAL, 1: Termination.MAX_ITERS, 2: Termination.STALLED}


@dataclass(frozen=True)
class CombOmpOptions:
    constrained_update: bool = False
    debias: bool = False


def default_stopping(M: int) -> StoppingCriteria:
    return StoppingCriteria(max_iters=M, residual_tol=1e-6)


def _prepare(G, y):
    if isinstance(G, CombinedDictionary):
        G, split = G.G, G.split
    else:
        split = None
    if not isinstance(G, Dictionary):
        G = Dictionary(G)
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != G.shape[0]:
        raise ValueError(f"signal length {y.shape[0]} != dictionary rows {G.shape[0]}")
    if not np.all(np.isfinite(y)):
        raise ValueError("signal has non-finite entries")
    return G, split, y


def _kernel_solve(G: Dictionary, y, kx: int, stop: StoppingCriteria) -> SparseSolution:
    order, coef, rnorm, iters, status = _backend.kernels().greedy_pursuit(
        G.matrix, G.column_norms, y, kx, stop.max_iters, stop.residual_tol
    )
    delta = np.zeros(G.shape[1])
    delta[order] = coef
    return make_solution(delta, kx, rnorm, iters, _STATUS[status], order=order, support=order)


def omp_solve(G, y, stop: StoppingCriteria | None = None) -> SparseSolution:
    """Orthogonal matching pursuit on a general dictionary."""
    G, _, y = _prepare(G, y)
    stop = stop or default_stopping(G.shape[0])
    return _kernel_solve(G, y, 0, stop)


def _constrained_pursuit(G: Dictionary, y, kx: int, stop: StoppingCriteria, update) -> SparseSolution:
    A, norms = G.matrix, G.column_norms
    M, K = A.shape
    chosen = np.zeros(K, dtype=bool)
    order: list[int] = []
    delta = np.zeros(K)
    r = y.copy()
    rnorm = float(np.linalg.norm(r))
    status = Termination.MAX_ITERS
    history = [rnorm]
    while True:
        if rnorm <= stop.residual_tol:
            status = Termination.RESIDUAL
            break
        if len(order) >= stop.max_iters:
            status = Termination.MAX_ITERS
            break
        pi = (A.T @ r) / norms
        vx = vd = -1.0
        i_hat = j_hat = -1
        if kx > 0 and not chosen[:kx].all():
            px = np.where(chosen[:kx], -np.inf, pi[:kx])
            i_hat = int(np.argmax(px))
            vx = max(px[i_hat], 0.0)
        if kx < K and not chosen[kx:].all():
            pd = np.where(chosen[kx:], -np.inf, np.abs(pi[kx:]))
            j_hat = kx + int(np.argmax(pd))
            vd = pd[j_hat - kx]
        k, v = (i_hat, vx) if vx >= vd else (j_hat, vd)
        if v <= 0.0 or len(order) >= M:
            status = Termination.STALLED
            break
        trial = order + [k]
        sup = sorted(trial)
        try:
            coef = update(A[:, sup], y, sum(1 for i in sup if i < kx))
        except LinAlgError:
            status = Termination.STALLED
            break
        order = trial
        chosen[k] = True
        delta[:] = 0.0
        delta[sup] = coef
        r = y - A[:, sup] @ coef
        rnorm = float(np.linalg.norm(r))
        history.append(rnorm)
    sol = make_solution(delta, kx, rnorm, len(order), status, order=order, support=order)
    sol.extras["residual_history"] = history
    return sol


def _lsi_update(A1, y, nx):
    return lsi_solve(A1, y, nx).solution


def _nnls_update(A1, y, nx):
    return nnls_solve(A1, y).solution


def nn_omp_solve(X, y, stop: StoppingCriteria | None = None) -> SparseSolution:
    """OMP restricted to positive correlations, with NNLS coefficient updates."""
    X, _, y = _prepare(X, y)
    stop = stop or default_stopping(X.shape[0])
    return _constrained_pursuit(X, y, X.shape[1], stop, _nnls_update)


def debias(G: Dictionary, y, support, kx: int) -> tuple[np.ndarray, float]:
    """Sign-constrained least squares restricted to ``support``."""
    sup = sorted(support)
    delta = np.zeros(G.shape[1])
    if not sup:
        return delta, float(np.linalg.norm(y))
    res = lsi_solve(G.matrix[:, sup], y, sum(1 for i in sup if i < kx))
    delta[sup] = res.solution
    return delta, res.residual_norm


def comb_omp_solve(
    G: CombinedDictionary,
    y,
    stop: StoppingCriteria | None = None,
    opts: CombOmpOptions = CombOmpOptions(),
) -> SparseSolution:
    """Greedy pursuit of a combined representation over ``G = [X | D]``."""
    Gd, kx, y = _prepare(G, y)
    if kx is None:
        raise TypeError("comb_omp_solve needs a CombinedDictionary")
    stop = stop or default_stopping(Gd.shape[0])
    if opts.constrained_update:
        sol = _constrained_pursuit(Gd, y, kx, stop, _lsi_update)
    else:
        sol = _kernel_solve(Gd, y, kx, stop)
    if not opts.debias or not sol.order:
        return sol
    try:
        delta, rnorm = debias(Gd, y, sol.order, kx)
    except LinAlgError:
        return sol
    return make_solution(delta, kx, rnorm, sol.iterations, sol.termination, order=sol.order, support=sol.order)
