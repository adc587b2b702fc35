"""Compare the compiled and pure-Python kernels on the two path solvers.

Runs COMB-OMP and COMB-BP on the same planted Gaussian instances with each
available backend, checks that both produce the same coefficients, and
prints median wall time per solve and the speed-up.

    python3 benchmarks/bench_backends.py [--trials 50] [--M 100] [--Kx 150] [--Kd 50] [--S 20]
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from combsparse import _backend
from combsparse.bench import TrialSpec, plant_instance, solve, trial_rng


def _time_backend(backend: str, instances, algorithm: str):
    _backend.use(backend)
    times, outputs = [], []
    for G, y, _ in instances:
        t0 = time.perf_counter()
        sol = solve(algorithm, G, y)
        times.append(time.perf_counter() - t0)
        outputs.append(sol.delta)
    return statistics.median(times), outputs


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--M", type=int, default=100)
    p.add_argument("--Kx", type=int, default=150)
    p.add_argument("--Kd", type=int, default=50)
    p.add_argument("--S", type=int, default=20, help="total sparsity, split evenly between blocks")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    sx = args.S // 2
    spec = TrialSpec(args.M, args.Kx, args.Kd, sx, args.S - sx)
    instances = [plant_instance(spec, trial_rng(args.seed, t)) for t in range(args.trials)]
    backends = _backend.available()
    previous = _backend.name()
    print(f"instances: {args.trials} x (M={args.M}, Kx={args.Kx}, Kd={args.Kd}, Sx={sx}, Sd={args.S - sx})")
    print(f"{'algorithm':<10} " + " ".join(f"{b + ' ms':>12}" for b in backends) + f" {'speed-up':>9} {'max |diff|':>11}")
    try:
        for algorithm in ("comb-omp", "comb-bp"):
            med, outs = {}, {}
            for b in backends:
                med[b], outs[b] = _time_backend(b, instances, algorithm)
            line = f"{algorithm:<10} " + " ".join(f"{1e3 * med[b]:>12.3f}" for b in backends)
            if len(backends) == 2:
                diff = max(float(np.max(np.abs(u - v))) for u, v in zip(outs["cython"], outs["python"]))
                line += f" {med['python'] / med['cython']:>8.1f}x {diff:>11.1e}"
            print(line)
    finally:
        _backend.use(previous)
    if len(backends) < 2:
        print("compiled extension not built; only the Python kernels were timed")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
