"""Monte-Carlo recovery experiments.

Every trial draws its dictionary, support and coefficients from its own
``numpy.random.SeedSequence(master_seed, spawn_key=...)``, keyed by the cell
coordinates and the trial index only. All algorithms in a cell therefore see
the same instances, and results do not depend on worker count or order.

CSV schemas (column order is part of the contract):

* grid: ``M,Kx,Kd,Sx,Sd,coeff_model,snr_db,algorithm,trials,p_exact,mean_rre,mean_ms``
* phase transition: ``M,Kx,Kd,Sg,rho,algorithm,trials,p_exact,mean_rre,mean_ms``
* contours: ``algorithm,M,level,Sg``

``mean_ms`` is written as ``0`` when timing is disabled, which makes the
files byte-reproducible.

Noiseless trials stop at a residual norm of ``1e-6``; noisy trials stop at
the realized noise norm (see :func:`stopping_tolerance`).
"""

from __future__ import annotations

import csv
import enum
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .convex import PathLimitError, PathSolverConfig, bp_solve, comb_bp_solve, nn_homotopy_solve
from .dictgen import CombinedDictionary, Dictionary, gaussian_matrix
from .greedy import StoppingCriteria, comb_omp_solve, nn_omp_solve, omp_solve
from .solution import SparseSolution, Termination

EXACT_RRE = 1e-6

GRID_COLUMNS = ["M", "Kx", "Kd", "Sx", "Sd", "coeff_model", "snr_db", "algorithm", "trials", "p_exact", "mean_rre", "mean_ms"]
PT_COLUMNS = ["M", "Kx", "Kd", "Sg", "rho", "algorithm", "trials", "p_exact", "mean_rre", "mean_ms"]
CONTOUR_COLUMNS = ["algorithm", "M", "level", "Sg"]

ALGORITHMS = ("omp", "comb-omp", "bp", "comb-bp")


class CoeffModel(str, enum.Enum):
    UNIFORM = "UNIFORM"
    SIGNS = "SIGNS"


@dataclass(frozen=True)
class TrialSpec:
    M: int
    Kx: int
    Kd: int
    Sx: int
    Sd: int
    coeff_model: CoeffModel = CoeffModel.UNIFORM
    snr_db: float | None = None
    algorithm: str = "comb-omp"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coeff_model", CoeffModel(self.coeff_model))
        if min(self.M, self.Kx + self.Kd) < 1 or min(self.Kx, self.Kd, self.Sx, self.Sd) < 0:
            raise ValueError("invalid sizes")
        if self.Sx > self.Kx or self.Sd > self.Kd:
            raise ValueError(f"support sizes ({self.Sx}, {self.Sd}) exceed blocks ({self.Kx}, {self.Kd})")
        if self.Sx + self.Sd > self.M:
            raise ValueError(f"Sx + Sd = {self.Sx + self.Sd} exceeds M = {self.M}")


@dataclass(frozen=True)
class TrialRecord:
    spec: TrialSpec
    rre: float
    exact: bool
    wall_time: float
    termination: Termination


def rre(delta_hat, delta) -> float:
    """``||delta_hat - delta||^2 / ||delta||^2``."""
    delta_hat = np.asarray(delta_hat, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if delta_hat.shape != delta.shape:
        raise ValueError("length mismatch")
    den = float(delta @ delta)
    if den == 0:
        raise ValueError("true coefficient vector is zero")
    e = delta_hat - delta
    return float(e @ e) / den


def trial_rng(master_seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def add_noise(signal: np.ndarray, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """White Gaussian noise rescaled to hit ``snr_db`` exactly for this draw."""
    n = rng.standard_normal(signal.shape[0])
    ps = float(signal @ signal)
    n *= math.sqrt(ps / (float(n @ n) * 10 ** (snr_db / 10)))
    return signal + n


def plant_instance(spec: TrialSpec, rng: np.random.Generator | None = None):
    """Draw ``(G, y, delta)`` for one trial."""
    rng = rng or np.random.Generator(np.random.PCG64(spec.seed))
    Kg = spec.Kx + spec.Kd
    G = CombinedDictionary(Dictionary(gaussian_matrix(spec.M, Kg, rng)), spec.Kx)
    sx = rng.choice(spec.Kx, spec.Sx, replace=False) if spec.Sx else np.zeros(0, dtype=int)
    sd = spec.Kx + rng.choice(spec.Kd, spec.Sd, replace=False) if spec.Sd else np.zeros(0, dtype=int)
    delta = np.zeros(Kg)
    if spec.coeff_model is CoeffModel.UNIFORM:
        delta[sx] = rng.uniform(0.0, 1.0, spec.Sx)
        delta[sd] = rng.uniform(-1.0, 1.0, spec.Sd)
    else:
        delta[sx] = 1.0
        delta[sd] = rng.choice([-1.0, 1.0], spec.Sd)
    y = G.matrix @ delta
    if spec.snr_db is not None and math.isfinite(spec.snr_db):
        y = add_noise(y, spec.snr_db, rng)
    return G, y, delta


def solve(
    algorithm: str,
    G: CombinedDictionary,
    y,
    eps: float = 1e-6,
    max_breakpoints: int | None = None,
    finish_segment: bool = True,
) -> SparseSolution:
    """Dispatch by name; a path cap returns the partial solution instead of raising.

    ``finish_segment`` is passed to the l1 solvers; turn it off when ``eps``
    is a noise level rather than an exactness tolerance.
    """
    M = G.G.shape[0]
    stop = StoppingCriteria(max_iters=M, residual_tol=eps)
    cfg = PathSolverConfig(residual_tol=eps, max_breakpoints=max_breakpoints, finish_segment=finish_segment)
    try:
        if algorithm == "omp":
            return omp_solve(G.G, y, stop)
        if algorithm == "comb-omp":
            return comb_omp_solve(G, y, stop)
        if algorithm == "nnomp":
            return nn_omp_solve(G.G, y, stop)
        if algorithm == "bp":
            return bp_solve(G.G, y, cfg)
        if algorithm == "comb-bp":
            return comb_bp_solve(G, y, cfg)
        if algorithm == "nnbp":
            return nn_homotopy_solve(G.G, y, cfg)
    except PathLimitError as exc:
        return exc.partial
    raise ValueError(f"unknown algorithm {algorithm!r}")


def stopping_tolerance(G: CombinedDictionary, y: np.ndarray, delta: np.ndarray) -> float:
    """Residual target for a trial: ``1e-6`` when noiseless, else the realized noise norm.

    Fitting below the noise norm only fits noise, so noisy trials stop once
    the residual reaches ``||y - G delta||``.
    """
    return max(EXACT_RRE, float(np.linalg.norm(y - G.matrix @ delta)))


def run_trial(spec: TrialSpec, algorithms: Sequence[str], rng=None, timing: bool = True) -> list[TrialRecord]:
    G, y, delta = plant_instance(spec, rng)
    noisy = spec.snr_db is not None and math.isfinite(spec.snr_db)
    eps = stopping_tolerance(G, y, delta) if noisy else EXACT_RRE
    out = []
    for alg in algorithms:
        t0 = time.perf_counter()
        sol = solve(alg, G, y, eps=eps, finish_segment=not noisy)
        dt = time.perf_counter() - t0 if timing else 0.0
        e = rre(sol.delta, delta)
        out.append(TrialRecord(replace(spec, algorithm=alg), e, e < EXACT_RRE, dt, sol.termination))
    return out


@dataclass
class CellStats:
    trials: int = 0
    exact: int = 0
    rre_sum: float = 0.0
    time_sum: float = 0.0

    def add(self, rec: TrialRecord):
        self.trials += 1
        self.exact += rec.exact
        self.rre_sum += rec.rre
        self.time_sum += rec.wall_time

    @property
    def p_exact(self) -> float:
        return self.exact / self.trials if self.trials else float("nan")

    @property
    def mean_rre(self) -> float:
        return self.rre_sum / self.trials if self.trials else float("nan")

    @property
    def mean_ms(self) -> float:
        return 1e3 * self.time_sum / self.trials if self.trials else float("nan")


def _fmt(v) -> str:
    if v is None:
        return "inf"
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ("inf" if v > 0 else ("-inf" if v < 0 else "nan"))
    if isinstance(v, enum.Enum):
        return v.value
    return str(v)


def _write_csv(columns, rows, path=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in columns])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


@dataclass
class GridResult:
    rows: list[dict] = field(default_factory=list)
    columns: list[str] = field(default_factory=lambda: list(GRID_COLUMNS))

    def to_csv(self, path=None) -> str:
        return _write_csv(self.columns, self.rows, path)

    def cell(self, algorithm: str, **coords) -> dict:
        for row in self.rows:
            if row["algorithm"] == algorithm and all(row[k] == v for k, v in coords.items()):
                return row
        raise KeyError((algorithm, coords))


def _map(fn: Callable, tasks: list, workers: int) -> list:
    if workers == 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers or None) as ex:
        return list(ex.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * (workers or 4)))))


def _grid_cell(task):
    base, algorithms, trials, master_seed, timing = task
    stats = {a: CellStats() for a in algorithms}
    for t in range(trials):
        rng = trial_rng(master_seed, base.M, base.Sx, base.Sd, t)
        for rec in run_trial(base, algorithms, rng, timing):
            stats[rec.spec.algorithm].add(rec)
    return stats


def run_grid(
    base: TrialSpec,
    sx_range: Iterable[int],
    sd_range: Iterable[int],
    trials: int,
    algorithms: Sequence[str] = ALGORITHMS,
    master_seed: int | None = None,
    workers: int = 1,
    timing: bool = True,
    progress: Callable[[str], None] | None = None,
) -> GridResult:
    """Exact-recovery probability, mean RRE and mean time per ``(Sx, Sd)`` cell.

    ``master_seed`` defaults to ``base.seed``.
    """
    seed = base.seed if master_seed is None else master_seed
    sx_range, sd_range = list(sx_range), list(sd_range)
    if not sx_range or not sd_range:
        raise ValueError("empty range")
    cells = [replace(base, Sx=sx, Sd=sd) for sx in sx_range for sd in sd_range]
    tasks = [(c, tuple(algorithms), trials, seed, timing) for c in cells]
    result = GridResult()
    for cell, stats in zip(cells, _map(_grid_cell, tasks, workers)):
        if progress:
            progress(f"Sx={cell.Sx} Sd={cell.Sd} " + " ".join(f"{a}={s.p_exact:.2f}" for a, s in stats.items()))
        for alg in algorithms:
            s = stats[alg]
            result.rows.append(
                dict(M=cell.M, Kx=cell.Kx, Kd=cell.Kd, Sx=cell.Sx, Sd=cell.Sd, coeff_model=cell.coeff_model,
                     snr_db=cell.snr_db, algorithm=alg, trials=s.trials, p_exact=s.p_exact,
                     mean_rre=s.mean_rre, mean_ms=s.mean_ms)
            )
    return result


def sparsity_from_rho(rho: float, M: int) -> int:
    """``Sg = floor(rho * M + 0.5)`` (round half up), at least 1."""
    return max(1, int(math.floor(rho * M + 0.5)))


def split_sparsity(sg: int, kx: int, kd: int, rng: np.random.Generator) -> tuple[int, int]:
    """``Sx = floor(tau * Sg)`` with ``tau ~ U(0, 1)``, clipped to the block sizes."""
    sx = int(math.floor(rng.uniform() * sg))
    sx = min(max(sx, sg - kd), kx)
    return sx, sg - sx


def _pt_cell(task):
    M, sg, kx, kd, algorithms, trials, seed, timing = task
    stats = {a: CellStats() for a in algorithms}
    for t in range(trials):
        rng = trial_rng(seed, M, sg, t)
        sx, sd = split_sparsity(sg, kx, kd, rng)
        spec = TrialSpec(M, kx, kd, sx, sd, seed=seed)
        for rec in run_trial(spec, algorithms, rng, timing):
            stats[rec.spec.algorithm].add(rec)
    return stats


@dataclass
class PhaseTransitionResult:
    grid: GridResult
    contours: list[dict]

    def contour(self, algorithm: str, level: float = 0.5) -> dict[int, float]:
        return {c["M"]: c["Sg"] for c in self.contours if c["algorithm"] == algorithm and c["level"] == level}

    def contours_csv(self, path=None) -> str:
        return _write_csv(CONTOUR_COLUMNS, self.contours, path)


def contour_crossing(sgs: Sequence[int], probs: Sequence[float], level: float) -> float:
    """Sparsity where recovery probability first falls below ``level``.

    Linear interpolation between consecutive points, starting from the
    implicit point ``(0, 1)``. If the probability never falls below
    ``level`` the largest tested sparsity is returned.
    """
    xs = [0.0] + [float(s) for s in sgs]
    ps = [1.0] + [float(p) for p in probs]
    for k in range(1, len(xs)):
        if ps[k] < level:
            x0, x1, p0, p1 = xs[k - 1], xs[k], ps[k - 1], ps[k]
            if p0 == p1:
                return x1
            return x0 + (p0 - level) * (x1 - x0) / (p0 - p1)
    return xs[-1]


def run_phase_transition(
    Kg: int,
    Kx: int,
    m_range: Iterable[int],
    rho_range: Iterable[float],
    trials: int,
    algorithms: Sequence[str] = ALGORITHMS,
    master_seed: int = 0,
    workers: int = 1,
    timing: bool = True,
    levels: Sequence[float] = (0.25, 0.5, 0.75),
    progress: Callable[[str], None] | None = None,
) -> PhaseTransitionResult:
    """Recovery probability over ``(M, rho)`` with ``Sg = round(rho * M)``."""
    kd = Kg - Kx
    m_range, rho_range = list(m_range), list(rho_range)
    if not m_range or not rho_range or not 0 <= Kx <= Kg:
        raise ValueError("invalid phase-transition ranges")
    cells = []
    for M in m_range:
        for rho in rho_range:
            sg = min(sparsity_from_rho(rho, M), M, Kg)
            cells.append((M, rho, sg))
    tasks = [(M, sg, Kx, kd, tuple(algorithms), trials, master_seed, timing) for M, _, sg in cells]
    grid = GridResult(columns=list(PT_COLUMNS))
    for (M, rho, sg), stats in zip(cells, _map(_pt_cell, tasks, workers)):
        if progress:
            progress(f"M={M} Sg={sg} " + " ".join(f"{a}={s.p_exact:.2f}" for a, s in stats.items()))
        for alg in algorithms:
            s = stats[alg]
            grid.rows.append(dict(M=M, Kx=Kx, Kd=kd, Sg=sg, rho=rho, algorithm=alg, trials=s.trials,
                                  p_exact=s.p_exact, mean_rre=s.mean_rre, mean_ms=s.mean_ms))
    contours = []
    for alg in algorithms:
        for M in m_range:
            rows = [r for r in grid.rows if r["algorithm"] == alg and r["M"] == M]
            rows.sort(key=lambda r: (r["Sg"], r["rho"]))
            for level in levels:
                sg = contour_crossing([r["Sg"] for r in rows], [r["p_exact"] for r in rows], level)
                contours.append(dict(algorithm=alg, M=M, level=level, Sg=sg))
    return PhaseTransitionResult(grid, contours)


def spec_to_json(spec: TrialSpec) -> dict:
    d = asdict(spec)
    d["coeff_model"] = spec.coeff_model.value
    return d
