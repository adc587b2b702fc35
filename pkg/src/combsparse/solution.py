from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class Termination(str, enum.Enum):
    RESIDUAL = "RESIDUAL"
    MAX_ITERS = "MAX_ITERS"
    STALLED = "STALLED"


@dataclass(frozen=True)
class StoppingCriteria:
    """Stop after ``max_iters`` selections or once ``||r||_2 <= residual_tol``."""

    max_iters: int
    residual_tol: float = 1e-6

    def __post_init__(self):
        if self.max_iters < 0 or self.residual_tol < 0:
            raise ValueError("stopping criteria must be non-negative")
        if self.max_iters == 0 and self.residual_tol == 0:
            raise ValueError("need a positive iteration cap or residual tolerance")


@dataclass(frozen=True)
class SparseSolution:
    """Coefficient vector over ``G = [X | D]`` and its active supports.

    ``support_x`` indexes the X block, ``support_d`` the D block, both in
    global column numbering. ``order`` is the selection sequence of greedy
    solvers (empty for path solvers); ``lam`` is the final regularization
    value of path solvers.
    """

    delta: np.ndarray
    support_x: tuple[int, ...]
    support_d: tuple[int, ...]
    residual_norm: float
    iterations: int
    termination: Termination
    order: tuple[int, ...] = ()
    lam: float | None = None
    extras: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sorted(self.support_x + self.support_d))

    @property
    def nonzero_support(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.delta))

    def alpha(self, split: int) -> np.ndarray:
        return self.delta[:split]

    def beta(self, split: int) -> np.ndarray:
        return self.delta[split:]


def make_solution(delta, split, residual_norm, iterations, termination, order=(), lam=None, support=None):
    """Build a :class:`SparseSolution`, deriving supports from ``support`` or the nonzeros."""
    delta = np.asarray(delta, dtype=float)
    idx = np.flatnonzero(delta) if support is None else np.asarray(sorted(support), dtype=int)
    sx = tuple(int(i) for i in idx if i < split)
    sd = tuple(int(i) for i in idx if i >= split)
    return SparseSolution(
        delta, sx, sd, float(residual_norm), int(iterations), Termination(termination),
        tuple(int(i) for i in order), lam,
    )
