"""Saturation-noise removal over ``G = [-I | DCT]`` on 8x8 patches.

Each patch is coded over ``[-I | D]`` and rebuilt from its DCT part alone.
A non-negative coefficient on ``-I`` is a spike that pulls a pixel down, so
pixels saturated to 0 are coded as observed. Saturation to 255 pushes
pixels up; those patches are negated before coding (the DCT part absorbs the
sign) and the reconstruction is negated back.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bench import solve
from .dictgen import CombinedDictionary, Dictionary, dct2d_dictionary
from .solution import SparseSolution, Termination

PATCH = 8


class ImageError(ValueError):
    pass


def read_pgm(path) -> np.ndarray:
    """Read a binary 8-bit PGM (P5) as a float array in ``[0, 255]``."""
    data = Path(path).read_bytes()
    tokens = []
    pos = 0
    # header: magic, width, height, maxval separated by whitespace/comments
    pattern = re.compile(rb"\s*(#[^\n]*\n\s*)*(\S+)")
    while len(tokens) < 4:
        m = pattern.match(data, pos)
        if m is None:
            raise ImageError(f"{path}: truncated PGM header")
        tokens.append(m.group(2))
        pos = m.end()
    if tokens[0] != b"P5":
        raise ImageError(f"{path}: only binary P5 PGM is supported")
    w, h, maxval = (int(t) for t in tokens[1:])
    if maxval > 255:
        raise ImageError(f"{path}: 16-bit PGM is not supported")
    pos += 1
    pix = np.frombuffer(data, dtype=np.uint8, count=w * h, offset=pos)
    return pix.reshape(h, w).astype(float)


def write_pgm(path, img: np.ndarray) -> None:
    arr = np.clip(np.rint(np.asarray(img, dtype=float)), 0, 255).astype(np.uint8)
    h, w = arr.shape
    Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + arr.tobytes())


def saturate(img: np.ndarray, fraction: float, seed) -> tuple[np.ndarray, np.ndarray]:
    """Pin ``floor(fraction * N)`` uniformly drawn pixels to 255.

    Returns the corrupted image and the boolean mask of drawn positions;
    pixels that were already 255 can be drawn.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    img = np.asarray(img, dtype=float)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.Generator(np.random.PCG64(seed))
    n = img.size
    count = int(math.floor(fraction * n))
    mask = np.zeros(n, dtype=bool)
    mask[rng.choice(n, count, replace=False)] = True
    mask = mask.reshape(img.shape)
    out = img.copy()
    out[mask] = 255.0
    return out, mask


def psnr(reference: np.ndarray, test: np.ndarray) -> float:
    """``10 log10(255^2 / MSE)``; ``inf`` for identical images."""
    reference = np.asarray(reference, dtype=float)
    test = np.asarray(test, dtype=float)
    if reference.shape != test.shape:
        raise ImageError(f"shape mismatch {reference.shape} vs {test.shape}")
    mse = float(np.mean((reference - test) ** 2))
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(255.0**2 / mse)


def to_patches(img: np.ndarray, side: int = PATCH) -> np.ndarray:
    """Non-overlapping ``side x side`` patches as columns (row-major within a patch)."""
    h, w = img.shape
    if h % side or w % side:
        raise ImageError(f"image {h}x{w} is not divisible into {side}x{side} patches")
    p = img.reshape(h // side, side, w // side, side).transpose(0, 2, 1, 3)
    return p.reshape(-1, side * side).T.copy()


def from_patches(cols: np.ndarray, shape: tuple[int, int], side: int = PATCH) -> np.ndarray:
    h, w = shape
    p = cols.T.reshape(h // side, w // side, side, side).transpose(0, 2, 1, 3)
    return p.reshape(h, w)


def patch_dictionary(side: int = PATCH) -> CombinedDictionary:
    n = side * side
    return CombinedDictionary.from_blocks(Dictionary(-np.eye(n)), dct2d_dictionary(side))


@dataclass
class RecoveryReport:
    image: np.ndarray
    solutions: list[SparseSolution] = field(repr=False)
    stalled: int = 0


def recover_image(
    img: np.ndarray,
    algorithm: str,
    eps: float = 1e-6,
    saturation_level: int = 255,
    max_breakpoints: int | None = None,
) -> RecoveryReport:
    """Code every patch over ``[-I | DCT]`` and rebuild it from the DCT part.

    ``saturation_level`` is 255 (bright spikes) or 0 (dark spikes). Patches
    whose solver stalls short of ``eps`` keep their observed pixels and are
    counted in ``stalled``.
    """
    if saturation_level not in (0, 255):
        raise ImageError("saturation_level must be 0 or 255")
    sign = -1.0 if saturation_level == 255 else 1.0
    img = np.asarray(img, dtype=float)
    if img.ndim != 2:
        raise ImageError("expected a 2-D grayscale image")
    G = patch_dictionary()
    n = PATCH * PATCH
    D = G.D
    cols = to_patches(img)
    out = np.empty_like(cols)
    sols = []
    stalled = 0
    cap = max_breakpoints if max_breakpoints is not None else 20 * n
    for k in range(cols.shape[1]):
        y = sign * cols[:, k]
        sol = solve(algorithm, G, y, eps=eps, max_breakpoints=cap)
        if sol.termination is Termination.RESIDUAL:
            out[:, k] = sign * (D @ sol.delta[n:])
        else:
            out[:, k] = cols[:, k]
            stalled += 1
        sols.append(sol)
    rec = np.clip(from_patches(out, img.shape), 0.0, 255.0)
    return RecoveryReport(rec, sols, stalled)
