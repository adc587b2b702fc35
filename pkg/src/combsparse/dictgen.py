"""Dictionaries and coherence measures.

Random dictionaries use ``numpy.random.Generator(PCG64(seed))`` with
``standard_normal`` (ziggurat sampler), so a seed fully determines the
matrix for a given numpy major version.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.fft import dct
from scipy.optimize import linprog


class DictionaryError(ValueError):
    pass


class LPFailure(RuntimeError):
    """LP solver returned neither an optimum nor an infeasibility verdict."""


def _column_norms(A: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("ij,ij->j", A, A))


@dataclass(frozen=True)
class Dictionary:
    """Column-normalized ``M x K`` matrix.

    The constructor rescales every column to unit l2 norm and rejects zero
    columns. ``column_norms`` holds the norms after normalization, kept so
    that correlation code can divide by them without recomputing.
    """

    matrix: np.ndarray
    column_norms: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = np.array(self.matrix, dtype=float, ndmin=2)
        if A.ndim != 2 or A.size == 0:
            raise DictionaryError(f"dictionary must be a non-empty 2-D array, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise DictionaryError("dictionary has non-finite entries")
        norms = _column_norms(A)
        if np.any(norms == 0):
            raise DictionaryError(f"zero column(s) at {np.flatnonzero(norms == 0).tolist()}")
        A = np.asfortranarray(A / norms)
        A.setflags(write=False)
        norms = _column_norms(A)
        norms.setflags(write=False)
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "column_norms", norms)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def __len__(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class CombinedDictionary:
    """``G = [X | D]``; the first ``split`` atoms carry the sign constraint."""

    G: Dictionary
    split: int

    def __post_init__(self):
        if not 0 <= self.split <= self.G.shape[1]:
            raise DictionaryError(f"split {self.split} outside [0, {self.G.shape[1]}]")

    @classmethod
    def from_blocks(cls, X, D) -> "CombinedDictionary":
        X = _raw(X)
        D = _raw(D)
        if X.shape[0] != D.shape[0]:
            raise DictionaryError("X and D must have the same number of rows")
        return cls(Dictionary(np.hstack([X, D])), X.shape[1])

    @property
    def matrix(self) -> np.ndarray:
        return self.G.matrix

    @property
    def kx(self) -> int:
        return self.split

    @property
    def kd(self) -> int:
        return self.G.shape[1] - self.split

    @property
    def X(self) -> np.ndarray:
        return self.G.matrix[:, : self.split]

    @property
    def D(self) -> np.ndarray:
        return self.G.matrix[:, self.split :]


@dataclass(frozen=True)
class CoherenceProfile:
    mu_x: float
    mu_d: float
    mu_g: float
    sigma_x: float | None = None

    def __post_init__(self):
        for name in ("mu_x", "mu_d", "mu_g"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0 + 1e-12:
                raise DictionaryError(f"{name}={v} outside [0, 1]")
        if self.sigma_x is None:
            object.__setattr__(self, "sigma_x", self.mu_x)

    @property
    def mu_m(self) -> float:
        return max(self.mu_x, self.mu_d, self.mu_g)


def _raw(A) -> np.ndarray:
    if isinstance(A, Dictionary):
        return A.matrix
    if isinstance(A, CombinedDictionary):
        return A.G.matrix
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    return A


def gaussian_dictionary(M: int, K: int, seed: int) -> Dictionary:
    """i.i.d. N(0, 1) entries, columns normalized afterwards."""
    return Dictionary(gaussian_matrix(M, K, seed))


def gaussian_matrix(M: int, K: int, seed) -> np.ndarray:
    if M < 1 or K < 1:
        raise DictionaryError("M and K must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.Generator(np.random.PCG64(seed))
    return rng.standard_normal((M, K))


def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal 1-D DCT-II basis; column ``k`` is the ``k``-th cosine."""
    return dct(np.eye(n), norm="ortho", axis=0).T


def dct2d_dictionary(patch_side: int) -> Dictionary:
    """Separable 2-D DCT-II basis for row-major vectorized square patches.

    Atom ``i * n + j`` is ``outer(c_i, c_j).ravel()``.
    """
    if patch_side < 1:
        raise DictionaryError("patch_side must be positive")
    C = dct_matrix(patch_side)
    return Dictionary(np.kron(C, C))


def negated_identity(n: int) -> Dictionary:
    return Dictionary(-np.eye(n))


def _normalized_gram(A: np.ndarray, B: np.ndarray | None = None) -> np.ndarray:
    An = A / _column_norms(A)
    Bn = An if B is None else B / _column_norms(B)
    return An.T @ Bn


def coherence(D) -> float:
    """Largest absolute normalized inner product between distinct atoms."""
    A = _raw(D)
    if A.shape[1] < 2:
        raise DictionaryError("coherence needs at least two atoms")
    if np.any(_column_norms(A) == 0):
        raise DictionaryError("zero column")
    Gm = np.abs(_normalized_gram(A))
    np.fill_diagonal(Gm, 0.0)
    return float(min(Gm.max(), 1.0))


def one_sided_coherence(D) -> float:
    """``max_{i != j} |x_i^T x_j| / ||x_i||^2`` for un-normalized columns."""
    A = _raw(D)
    if A.shape[1] < 2:
        raise DictionaryError("coherence needs at least two atoms")
    sq = np.einsum("ij,ij->j", A, A)
    if np.any(sq == 0):
        raise DictionaryError("zero column")
    R = np.abs(A.T @ A) / sq[:, None]
    np.fill_diagonal(R, 0.0)
    return float(R.max())


def cross_coherence(X, D) -> float:
    """Largest absolute normalized inner product over all pairs ``(x_i, d_j)``."""
    A, B = _raw(X), _raw(D)
    if A.shape[0] != B.shape[0]:
        raise DictionaryError(f"row mismatch: {A.shape[0]} vs {B.shape[0]}")
    return float(min(np.abs(_normalized_gram(A, B)).max(), 1.0))


def coherence_profile(G: CombinedDictionary) -> CoherenceProfile:
    """Coherences of both blocks and between them.

    A block with fewer than two atoms has coherence 0; an empty block gives
    cross-coherence 0.
    """
    X, D = G.X, G.D
    mu_x = coherence(X) if X.shape[1] >= 2 else 0.0
    mu_d = coherence(D) if D.shape[1] >= 2 else 0.0
    mu_g = cross_coherence(X, D) if X.shape[1] and D.shape[1] else 0.0
    sigma_x = one_sided_coherence(X) if X.shape[1] >= 2 else 0.0
    return CoherenceProfile(mu_x, mu_d, mu_g, sigma_x)


def _positive_row_span(X: np.ndarray, tol: float, A_eq=None):
    """Find ``h`` with ``h^T X >= tol`` (and ``h^T A_eq = 0`` if given)."""
    M, K = X.shape
    kw = {}
    if A_eq is not None and A_eq.shape[1]:
        kw = dict(A_eq=A_eq.T, b_eq=np.zeros(A_eq.shape[1]))
    res = linprog(
        np.zeros(M),
        A_ub=-X.T,
        b_ub=-tol * np.ones(K),
        bounds=[(None, None)] * M,
        method="highs",
        **kw,
    )
    if res.status == 0:
        h = res.x
        margin = float(np.min(h @ X))
        if margin <= 0:
            raise LPFailure(f"LP reported feasibility but the certificate margin is {margin:.3g}")
        # The LP meets the margin only to its feasibility tolerance; rescale to meet it exactly.
        if margin < tol:
            h = h * (tol / margin)
        return True, h
    if res.status == 2:
        return False, None
    raise LPFailure(f"linprog failed: {res.message}")


def is_m_plus(X, tol: float = 1e-6) -> tuple[bool, np.ndarray | None]:
    """Whether the row span of ``X`` meets the positive orthant.

    Returns ``(True, h)`` with ``min(h^T X) >= tol`` when it does, otherwise
    ``(False, None)``.
    """
    return _positive_row_span(_raw(X), tol)


def save_matrix(path, A) -> None:
    """Write ``A`` as CSV with a ``rows,cols`` header line."""
    A = _raw(A)
    buf = io.StringIO()
    buf.write(f"{A.shape[0]},{A.shape[1]}\n")
    np.savetxt(buf, A, delimiter=",", fmt="%.17g")
    Path(path).write_text(buf.getvalue())


def load_matrix(path) -> np.ndarray:
    text = Path(path).read_text().splitlines()
    try:
        rows, cols = (int(v) for v in text[0].split(","))
        A = np.loadtxt(text[1:], delimiter=",", ndmin=2, dtype=float)
    except (ValueError, IndexError) as exc:
        raise DictionaryError(f"{path}: malformed matrix file ({exc})") from exc
    if A.shape != (rows, cols):
        A = A.reshape(rows, cols) if A.size == rows * cols else None
        if A is None:
            raise DictionaryError(f"{path}: header says {rows}x{cols}, found different entry count")
    return A
