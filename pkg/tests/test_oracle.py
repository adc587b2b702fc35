from __future__ import annotations

import itertools
from math import comb

import numpy as np
import pytest
from scipy.optimize import linprog

from combsparse.bench import TrialSpec, plant_instance, trial_rng
from combsparse.bounds import exact_recovery_condition, threshold_nonneg, threshold_reduced_nonneg
from combsparse.convex import comb_bp_solve
from combsparse.dictgen import CombinedDictionary, Dictionary, coherence, coherence_profile, gaussian_dictionary, is_m_plus
from combsparse.greedy import comb_omp_solve
from combsparse.linalg import nnls_solve, orthogonal_projector
from combsparse.oracle import (
    EnumerationLimitError,
    colex_combinations,
    lemma3_feasibility,
    ml0_search,
    nn_singleton_check,
)


def test_colex_order():
    assert colex_combinations(4, 2) == [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)]
    assert len(colex_combinations(7, 3)) == comb(7, 3)
    assert colex_combinations(3, 0) == [()]


# --------------------------------------------------------------------- ML0


def test_ml0_single_atom_and_zero():
    G = CombinedDictionary(gaussian_dictionary(8, 12, 0), 6)
    sol, unique = ml0_search(G, G.G.matrix[:, 2], 3)
    assert sol.support == (2,) and unique
    sol, unique = ml0_search(G, np.zeros(8), 3)
    assert sol.support == () and unique


def test_ml0_respects_sign_constraint():
    # -x_0 is not representable by x_0 alone; the oracle needs another route
    G = CombinedDictionary(Dictionary(np.eye(3)), 3)
    sol, _ = ml0_search(G, -np.eye(3)[:, 0], 3)
    assert sol.support == ()


def test_ml0_enumeration_guard():
    G = CombinedDictionary(gaussian_dictionary(10, 200, 1), 100)
    with pytest.raises(EnumerationLimitError):
        ml0_search(G, np.ones(10), 4)


def test_ml0_recovers_planted_and_solvers_agree_under_erc():
    agree = 0
    for t in range(100):
        rng = trial_rng(30, t)
        sg = int(rng.integers(1, 4))
        sx = int(rng.integers(0, sg + 1))
        G, y, d = plant_instance(TrialSpec(8, 6, 6, sx, sg - sx), rng)
        sol, unique = ml0_search(G, y, 3)
        planted = tuple(np.flatnonzero(d).tolist())
        assert sol.support == planted and unique
        A = G.G.matrix
        off = np.setdiff1d(np.arange(12), planted)
        if exact_recovery_condition(A[:, list(planted)], A[:, off]) < 1:
            agree += 1
            assert comb_omp_solve(G, y).nonzero_support == planted
            assert comb_bp_solve(G, y).nonzero_support == planted
    assert agree >= 1


def test_ml0_permutation_equivariant():
    rng = np.random.default_rng(31)
    for _ in range(10):
        A = gaussian_dictionary(6, 9, int(rng.integers(2**31))).matrix
        y = A[:, [1, 7]] @ rng.uniform(-1, 1, 2)
        perm = rng.permutation(9)
        s1, _ = ml0_search(CombinedDictionary(Dictionary(A), 0), y, 2)
        s2, _ = ml0_search(CombinedDictionary(Dictionary(A[:, perm]), 0), y, 2)
        assert sorted(perm[list(s2.support)].tolist()) == list(s1.support)


def test_ml0_never_larger_than_brute_force_minimum():
    rng = np.random.default_rng(32)
    for _ in range(10):
        A = gaussian_dictionary(5, 8, int(rng.integers(2**31))).matrix
        y = A[:, :3] @ rng.uniform(-1, 1, 3)
        sol, _ = ml0_search(CombinedDictionary(Dictionary(A), 0), y, 5)
        best = min(
            s
            for s in range(6)
            for sup in itertools.combinations(range(8), s)
            if s and np.linalg.norm(y - A[:, sup] @ np.linalg.lstsq(A[:, sup], y, rcond=None)[0]) <= 1e-6
        )
        assert len(sol.support) == best


# --------------------------------------------------------------- singleton


def test_singleton_examples():
    assert nn_singleton_check(np.eye(4), np.array([1.0, 0.0, 2.0, 0.5]))
    e1 = np.array([1.0, 0.0])
    assert not nn_singleton_check(np.column_stack([e1, e1]), e1)
    # no non-negative solution at all
    assert not nn_singleton_check(np.eye(2), np.array([-1.0, 0.0]))


def second_nonneg_solution(X, y, a):
    """An independent witness: a feasible point of {v >= 0 : X v = y} far from ``a``."""
    K = X.shape[1]
    for i in range(K):
        for sense in (1.0, -1.0):
            c = np.zeros(K)
            c[i] = sense
            res = linprog(c, A_eq=X, b_eq=y, bounds=[(0, None)] * K, method="highs")
            if res.status == 3:
                return True
            if res.status == 0 and np.linalg.norm(res.x - a) > 1e-3:
                v = res.x
                assert np.all(v >= 0) and np.linalg.norm(X @ v - y) < 1e-8
                return True
    return False


def test_singleton_in_coherence_regime():
    """Planted Sx within threshold_nonneg on M+ dictionaries.

    The coherence threshold alone does not make the set a singleton: an atom
    can sit inside the cone of the others once the atoms are rescaled onto
    the hyperplane h^T u = 1. Every negative verdict must therefore come with
    an explicit second solution, and positives must dominate.
    """
    n = t = singletons = 0
    while n < 100:
        rng = trial_rng(33, t)
        t += 1
        X = rng.standard_normal((10, 15))
        if not is_m_plus(X)[0]:
            continue
        Xn = Dictionary(X).matrix
        sx_max = threshold_nonneg(coherence(Xn)).max_sg
        if sx_max < 1:
            continue
        n += 1
        sx = int(rng.integers(1, sx_max + 1))
        a = np.zeros(15)
        a[rng.choice(15, sx, replace=False)] = rng.uniform(0.1, 1, sx)
        y = Xn @ a
        if nn_singleton_check(Xn, y):
            singletons += 1
            assert not second_nonneg_solution(Xn, y, a)
        else:
            assert second_nonneg_solution(Xn, y, a)
    assert singletons >= 90


def test_cone_membership_breaks_singleton():
    # x_2 = x_0 + x_1 (before normalization): X is in M+ and mu < 1, yet
    # y = x_2 also equals a positive combination of x_0 and x_1.
    X = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 2.0]])
    Xn = Dictionary(X).matrix
    assert is_m_plus(Xn)[0] and coherence(Xn) < 1
    assert threshold_nonneg(coherence(Xn)).max_sg >= 1
    assert not nn_singleton_check(Xn, Xn[:, 2])


def test_singleton_fails_outside_m_plus_when_cone_has_lineality():
    # columns e1 and -e1 let any multiple of (1, 1) be added
    X = np.array([[1.0, -1.0, 0.0], [0.0, 0.0, 1.0]])
    assert not nn_singleton_check(X, np.array([0.0, 1.0]))


# ------------------------------------------------------ projected feasibility


def test_lemma3_examples():
    X = np.vstack([np.ones(5), np.random.default_rng(34).standard_normal((3, 5))])
    ok1, _ = lemma3_feasibility(X, None)
    assert ok1 == is_m_plus(X)[0]
    D1 = np.array([[0.0], [1.0], [0.0], [0.0]])
    ok, h = lemma3_feasibility(X, D1)
    assert ok and np.min(h @ X) >= 1e-6 - 1e-12 and abs(h @ D1[:, 0]) <= 1e-9


def test_lemma3_consequence_projected_nnls_recovers():
    M = 64
    X, D = np.eye(M), Dictionary(np.random.default_rng(35).standard_normal((M, M))).matrix
    G = CombinedDictionary.from_blocks(X, D)
    prof = coherence_profile(G)
    sx_max = threshold_reduced_nonneg(1, prof).max_sg
    assert sx_max >= 1
    for t in range(100):
        rng = trial_rng(36, t)
        j = int(rng.integers(M))
        D1 = D[:, [j]]
        assert lemma3_feasibility(X, D1)[0]
        sx = int(rng.integers(1, sx_max + 1))
        alpha = np.zeros(M)
        alpha[rng.choice(M, sx, replace=False)] = rng.uniform(0.1, 1, sx)
        y = X @ alpha + rng.uniform(-1, 1) * D1[:, 0]
        P = orthogonal_projector(D1)
        a_hat = nnls_solve(P @ X, P @ y).solution
        assert np.linalg.norm(a_hat - alpha) ** 2 / np.linalg.norm(alpha) ** 2 < 1e-6
