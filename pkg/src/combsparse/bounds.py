"""Deterministic sparsity thresholds and coherence recovery conditions.

Every inequality is a plain predicate on coherences and support sizes.
Thresholds are strict: ``max_sg`` is the largest integer strictly below
``raw_bound``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .dictgen import CoherenceProfile
from .linalg import pseudoinverse


class Algorithm(str, enum.Enum):
    NN_UNIQUE = "NN_UNIQUE"
    FULL_RANK_PAIR = "FULL_RANK_PAIR"
    REDUCED_NN = "REDUCED_NN"
    COMB_BP = "COMB_BP"
    COMB_OMP = "COMB_OMP"


@dataclass(frozen=True)
class ThresholdReport:
    algorithm: Algorithm
    max_sg: int | float
    raw_bound: float
    inputs: CoherenceProfile | None = None
    sx: int | None = None
    sd: int | None = None

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.raw_bound)


def _pos(v: float) -> float:
    return v if v > 0 else 0.0


def strict_floor(bound: float) -> int | float:
    """Largest integer ``n`` with ``n < bound``."""
    if math.isinf(bound):
        return math.inf
    return max(math.ceil(bound) - 1, 0)


def _half_one_plus_inv(mu: float) -> float:
    return math.inf if mu == 0 else 0.5 * (1.0 + 1.0 / mu)


def threshold_nonneg(mu_x: float) -> ThresholdReport:
    """Non-negative uniqueness: ``Sx < 0.5 (1 + 1/mu_x)``."""
    if not 0.0 <= mu_x <= 1.0:
        raise ValueError(f"mu_x={mu_x} outside [0, 1]")
    raw = _half_one_plus_inv(mu_x)
    return ThresholdReport(Algorithm.NN_UNIQUE, strict_floor(raw), raw, CoherenceProfile(mu_x, 0.0, 0.0))


def full_rank_condition(sx: int, sd: int, prof: CoherenceProfile) -> bool:
    """Sufficient condition for ``[X1 D1]`` to have full column rank."""
    if sx < 0 or sd < 0:
        raise ValueError("support sizes must be non-negative")
    bx = _pos(1.0 - prof.mu_x * (sx - 1))
    bd = _pos(1.0 - prof.mu_d * (sd - 1))
    if prof.mu_g == 0:
        return bx > 0 and bd > 0
    return sx * sd < bx * bd / prof.mu_g**2


def coherence_bound_reduced(sd: int, prof: CoherenceProfile) -> float:
    """``0.5 [1 - mu_d (sd-1)]^+ (1 + mu_x) / (mu_x [1 - mu_d (sd-1)]^+ + sd mu_g^2)``.

    This is a bound on the number of non-negative atoms recoverable once a
    known D-support of size ``sd`` is projected out; it has the
    ``0.5 (1 + 1/mu)`` form and reduces to :func:`threshold_nonneg`'s bound
    when ``mu_g = 0``. It is not itself a coherence value.
    """
    if prof.mu_d > 0 and not sd < 1.0 + 1.0 / prof.mu_d:
        raise ValueError(f"sd={sd} must be < 1 + 1/mu_d = {1 + 1 / prof.mu_d:.6g}")
    bd = _pos(1.0 - prof.mu_d * (sd - 1))
    den = prof.mu_x * bd + sd * prof.mu_g**2
    if den == 0:
        return math.inf
    return 0.5 * bd * (1.0 + prof.mu_x) / den


def threshold_reduced_nonneg(sd: int, prof: CoherenceProfile) -> ThresholdReport:
    """Sx threshold for NN recovery after projecting out a known D-support."""
    raw = coherence_bound_reduced(sd, prof)
    return ThresholdReport(Algorithm.REDUCED_NN, strict_floor(raw), raw, prof, sd=sd)


def comb_bp_condition(sx: int, sd: int, prof: CoherenceProfile) -> bool:
    md, mg = prof.mu_d, prof.mu_g
    lhs = (1 + md) * (2 * sx * md + sd * (mg + md)) + 2 * sx * sd * (mg**2 - md**2)
    return lhs < (1 + md) ** 2


def threshold_comb_bp(prof: CoherenceProfile, s_max: int = 1000) -> ThresholdReport:
    """Largest ``S <= s_max`` whose every split ``Sx + Sd = S`` passes :func:`comb_bp_condition`.

    ``raw_bound`` is ``S + 1`` (the first failing size) so that the strict
    reading ``max_sg < raw_bound`` holds; it is ``inf`` if the cap is reached.
    """
    if s_max < 1:
        raise ValueError("s_max must be >= 1")
    if prof.mu_d == 0 and prof.mu_g == 0:
        return ThresholdReport(Algorithm.COMB_BP, math.inf, math.inf, prof)
    best = 0
    for s in range(1, s_max + 1):
        if not all(comb_bp_condition(sx, s - sx, prof) for sx in range(s + 1)):
            return ThresholdReport(Algorithm.COMB_BP, best, float(s), prof)
        best = s
    return ThresholdReport(Algorithm.COMB_BP, best, math.inf, prof)


def threshold_comb_omp(prof: CoherenceProfile) -> ThresholdReport:
    """``Sg < 0.5 (1 + 1/mu_m)``."""
    raw = _half_one_plus_inv(prof.mu_m)
    return ThresholdReport(Algorithm.COMB_OMP, strict_floor(raw), raw, prof)


def comb_omp_first_step_condition(sx: int, sd: int, prof: CoherenceProfile) -> bool:
    """Guarantees the first COMB-OMP pick lands in the true support."""
    if sx < 1:
        raise ValueError("needs at least one non-negative atom (sx >= 1)")
    return (sx - 1) * prof.mu_d + sd * prof.mu_g < 0.5


def comb_omp_full_condition(sx: int, sd: int, prof: CoherenceProfile) -> bool:
    s = sx * prof.mu_d + sd * prof.mu_g
    den = 1.0 - (s - prof.mu_d)
    if den <= 0:
        return False
    return s / den < 1.0


def exact_recovery_condition(G1, G2) -> float:
    """``max_i ||G1^+ g_i||_1`` over the atoms ``g_i`` outside the support.

    Values below one guarantee support recovery by OMP-type and l1 pursuit.
    """
    G2 = np.asarray(G2, dtype=float)
    if G2.size == 0:
        return 0.0
    return float(np.abs(pseudoinverse(G1) @ G2).sum(axis=0).max())
