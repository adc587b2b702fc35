"""Brute-force ground truth for desk-size instances."""

from __future__ import annotations

import itertools
from math import comb

import numpy as np
from scipy.optimize import linprog

from .dictgen import CombinedDictionary, Dictionary, LPFailure, _positive_row_span, _raw
from .linalg import LinAlgError, lsi_solve, nnls_solve
from .solution import SparseSolution, Termination, make_solution

MAX_SUPPORTS = 2_000_000


class EnumerationLimitError(ValueError):
    pass


def colex_combinations(n: int, k: int) -> list[tuple[int, ...]]:
    """``k``-subsets of ``range(n)`` in colexicographic order."""
    return sorted(itertools.combinations(range(n), k), key=lambda c: c[::-1])


def ml0_search(G: CombinedDictionary, y, s_max: int, tol: float = 1e-6) -> tuple[SparseSolution, bool]:
    """Sparsest sign-feasible representation by exhaustive support search.

    Supports are visited by size, colexicographically within a size. A
    support is feasible when its LSI fit (X-block coefficients >= 0) leaves a
    residual ``<= tol``. Rank-deficient supports are skipped: they never
    carry a minimal representation. Returns the first feasible support of
    the smallest size and whether it is the only one of that size.
    """
    if not isinstance(G, CombinedDictionary):
        G = CombinedDictionary(Dictionary(G), 0)
    A, kx = G.G.matrix, G.kx
    K = A.shape[1]
    y = np.asarray(y, dtype=float).ravel()
    total = sum(comb(K, s) for s in range(s_max + 1))
    if total > MAX_SUPPORTS:
        raise EnumerationLimitError(f"{total} supports exceeds the enumeration guard of {MAX_SUPPORTS}")

    if np.linalg.norm(y) <= tol:
        return make_solution(np.zeros(K), kx, float(np.linalg.norm(y)), 0, Termination.RESIDUAL, support=()), True
    for s in range(1, s_max + 1):
        found = None
        count = 0
        for sup in colex_combinations(K, s):
            try:
                res = lsi_solve(A[:, sup], y, sum(1 for i in sup if i < kx))
            except LinAlgError:
                continue
            if res.residual_norm <= tol:
                count += 1
                if found is None:
                    found = (sup, res)
        if found is not None:
            sup, res = found
            delta = np.zeros(K)
            delta[list(sup)] = res.solution
            sol = make_solution(delta, kx, res.residual_norm, s, Termination.RESIDUAL, support=sup)
            return sol, count == 1
    return make_solution(np.zeros(K), kx, float(np.linalg.norm(y)), s_max, Termination.STALLED, support=()), False


def _coordinate_range(X: np.ndarray, y: np.ndarray, i: int, sense: float):
    K = X.shape[1]
    cost = np.zeros(K)
    cost[i] = sense
    res = linprog(cost, A_eq=X, b_eq=y, bounds=[(0, None)] * K, method="highs")
    if res.status == 0:
        return res.x
    if res.status == 3:  # unbounded
        return None
    raise LPFailure(f"linprog failed: {res.message}")


def nn_singleton_check(X, y, tol: float = 1e-6, distance: float = 1e-6) -> bool:
    """Whether ``{a >= 0 : X a = y}`` holds exactly one point.

    NNLS supplies one solution; then every coordinate is pushed to its
    extremes over the feasible polytope by LP. The set is a singleton iff
    no LP vertex lies further than ``distance`` from the NNLS solution and
    no coordinate is unbounded.
    """
    X = _raw(X)
    y = np.asarray(y, dtype=float).ravel()
    base = nnls_solve(X, y)
    if base.residual_norm > tol:
        return False
    # Snap the equality right-hand side onto the NNLS fit so the LPs are feasible.
    y_fit = X @ base.solution
    for i in range(X.shape[1]):
        for sense in (1.0, -1.0):
            v = _coordinate_range(X, y_fit, i, sense)
            if v is None or np.linalg.norm(v - base.solution) > distance:
                return False
    return True


def lemma3_feasibility(X, D1, tol: float = 1e-6) -> tuple[bool, np.ndarray | None]:
    """Find ``h`` with ``h^T X >= tol`` and ``h^T D1 = 0``."""
    X = _raw(X)
    D1 = None if D1 is None else np.asarray(D1, dtype=float).reshape(X.shape[0], -1)
    return _positive_row_span(X, tol, D1)
