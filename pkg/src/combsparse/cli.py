"""Command-line entry point: ``combsparse <subcommand> [options]``.

Option values are resolved in three layers: built-in defaults, then the
JSON file given by ``--config``, then flags typed on the command line. The
resolved values are echoed to ``<out-dir>/<command>.config.json`` next to
the outputs; passing that file back through ``--config`` replays the run
(the echo records the subcommand, so it may be omitted on replay).

Machine-readable results go to standard output (and to ``--out-dir`` when
given); progress and diagnostics go to standard error.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .bench import (
    ALGORITHMS,
    CONTOUR_COLUMNS,
    CoeffModel,
    GridResult,
    TrialSpec,
    _write_csv,
    run_grid,
    run_phase_transition,
)
from .bounds import threshold_comb_bp, threshold_comb_omp, threshold_nonneg
from .convex import PathLimitError, PathSolverConfig, bp_solve, comb_bp_solve, nn_homotopy_solve, verify_kkt
from .dictgen import CombinedDictionary, CoherenceProfile, Dictionary, coherence_profile, load_matrix
from .greedy import CombOmpOptions, comb_omp_solve, nn_omp_solve, omp_solve
from .imaging import patch_dictionary, psnr, read_pgm, recover_image, saturate, write_pgm
from .oracle import ml0_search, nn_singleton_check
from .solution import SparseSolution, StoppingCriteria

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2

ALIASES = {
    "combomp": "comb-omp",
    "combbp": "comb-bp",
    "nn-omp": "nnomp",
    "nn-bp": "nnbp",
}
ALL_ALGORITHMS = ALGORITHMS + ("nnomp", "nnbp")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """``ArgumentParser`` that reports usage errors with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# value parsing (shared by flags and config files)


def _int_list(v) -> list[int]:
    """``"5,10,15"``, ``"1:30"`` or ``"10:100:10"`` (inclusive) or a JSON list."""
    if isinstance(v, (list, tuple)):
        return [int(x) for x in v]
    if isinstance(v, int):
        return [v]
    out: list[int] = []
    for part in str(v).split(","):
        part = part.strip()
        if ":" in part:
            bits = [int(b) for b in part.split(":")]
            if len(bits) not in (2, 3) or (len(bits) == 3 and bits[2] <= 0):
                raise ValueError(f"bad range {part!r}")
            start, stop = bits[0], bits[1]
            step = bits[2] if len(bits) == 3 else 1
            out.extend(range(start, stop + 1, step))
        elif part:
            out.append(int(part))
    if not out:
        raise ValueError(f"empty list {v!r}")
    return out


def _float_list(v) -> list[float]:
    """Like :func:`_int_list` for reals; ``start:stop:step`` is inclusive."""
    if isinstance(v, (list, tuple)):
        return [float(x) for x in v]
    if isinstance(v, (int, float)):
        return [float(v)]
    out: list[float] = []
    for part in str(v).split(","):
        part = part.strip()
        if ":" in part:
            bits = [float(b) for b in part.split(":")]
            if len(bits) != 3 or bits[2] <= 0:
                raise ValueError(f"real ranges need start:stop:step, got {part!r}")
            n = int(round((bits[1] - bits[0]) / bits[2])) + 1
            out.extend(round(bits[0] + i * bits[2], 12) for i in range(max(n, 0)))
        elif part:
            out.append(float(part))
    if not out:
        raise ValueError(f"empty list {v!r}")
    return out


def _algorithms(v) -> list[str]:
    items = v if isinstance(v, (list, tuple)) else str(v).split(",")
    out = []
    for a in items:
        a = ALIASES.get(a.strip().lower(), a.strip().lower())
        if a not in ALL_ALGORITHMS:
            raise ValueError(f"unknown algorithm {a!r}; choose from {', '.join(ALL_ALGORITHMS)}")
        out.append(a)
    return out


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    if isinstance(v, str) and v.lower() in ("true", "1", "yes"):
        return True
    if isinstance(v, str) and v.lower() in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _seed(v) -> int:
    s = int(v)
    if not 0 <= s < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return s


def _threads(v) -> int:
    n = int(v)
    if n < 0:
        raise ValueError("threads must be >= 0 (0 = auto)")
    return n


# ---------------------------------------------------------------------------
# parser construction


class _Options:
    """Collects option defaults and converters; argparse only records what was typed."""

    def __init__(self):
        self.defaults: dict[str, dict[str, Any]] = {}
        self.converters: dict[str, dict[str, Callable]] = {}

    def add(self, cmd: str, p: argparse.ArgumentParser, *flags, default=None, conv: Callable = str, **kw):
        dest = kw.pop("dest", None) or flags[0].lstrip("-").replace("-", "_")
        self.defaults.setdefault(cmd, {})[dest] = default
        self.converters.setdefault(cmd, {})[dest] = conv
        if kw.get("action") in ("store_true", "store_false"):
            p.add_argument(*flags, dest=dest, **kw)
        else:
            p.add_argument(*flags, dest=dest, metavar=kw.pop("metavar", dest.upper()), **kw)


GLOBAL = "_global"


def _add_global(opts: _Options, p: argparse.ArgumentParser):
    opts.add(GLOBAL, p, "--seed", default=0, conv=_seed, help="master RNG seed (64-bit)")
    opts.add(GLOBAL, p, "--threads", default=1, conv=_threads, help="worker processes (0 = auto)")
    opts.add(GLOBAL, p, "--out-dir", default=None, help="directory for output files and the config echo")
    opts.add(GLOBAL, p, "--no-timing", action="store_true", default=False, conv=_bool,
             help="record zero wall times so outputs are byte-reproducible")
    opts.add(GLOBAL, p, "--quiet", action="store_true", default=False, conv=_bool, help="suppress progress")
    p.add_argument("--config", dest="config", metavar="JSON", help="JSON file of option values")


def build_parser() -> tuple[argparse.ArgumentParser, _Options]:
    opts = _Options()
    parser = _Parser(prog="combsparse", description="Combined non-negative / unconstrained sparse recovery.",
                     argument_default=argparse.SUPPRESS)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_global(opts, parser)
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    _add_global(_Options(), common)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")

    def cmd(name, help):
        return sub.add_parser(name, help=help, parents=[common], argument_default=argparse.SUPPRESS)

    def dictionary_flags(name, p):
        opts.add(name, p, "--dict", default=None, help="dictionary matrix file (CSV with rows,cols header)")
        opts.add(name, p, "--split", default=0, conv=int, help="number of leading non-negative (X-block) atoms")

    p = cmd("coherence", "coherence profile of a combined dictionary")
    dictionary_flags("coherence", p)
    opts.add("coherence", p, "--patch-side", default=None, conv=int,
             help="use the image dictionary [-I | 2-D DCT] for this patch side instead of --dict")

    p = cmd("thresholds", "deterministic sparsity thresholds")
    opts.add("thresholds", p, "--mu-x", default=None, conv=float)
    opts.add("thresholds", p, "--mu-d", default=None, conv=float)
    opts.add("thresholds", p, "--mu-g", default=None, conv=float)
    dictionary_flags("thresholds", p)
    opts.add("thresholds", p, "--format", default="text", conv=str, choices=["text", "csv"])

    p = cmd("recover", "sparse-code one signal")
    dictionary_flags("recover", p)
    opts.add("recover", p, "--signal", default=None, help="signal file (matrix file with one row or column)")
    opts.add("recover", p, "--algorithm", default="comb-omp", conv=lambda v: _algorithms(v)[0])
    opts.add("recover", p, "--eps", default=1e-6, conv=float, help="residual-norm stopping tolerance")
    opts.add("recover", p, "--max-iters", default=None, conv=int, help="greedy iteration cap (default M)")
    opts.add("recover", p, "--max-breakpoints", default=None, conv=int, help="homotopy breakpoint cap")
    opts.add("recover", p, "--constrained-update", action="store_true", default=False, conv=_bool,
             help="COMB-OMP: sign-constrained coefficient update each iteration")
    opts.add("recover", p, "--debias", action="store_true", default=False, conv=_bool,
             help="COMB-OMP: sign-constrained re-fit on the final support")
    opts.add("recover", p, "--stop-at-eps", action="store_true", default=False, conv=_bool,
             help="l1 solvers: return the path point at --eps instead of finishing the last segment "
                  "(use when --eps is a noise level)")

    for name, help in (("exact-recovery", "exact-recovery probability over an (Sx, Sd) grid"),
                       ("noisy-recovery", "recovery error over an (Sx, Sd) grid and SNR levels")):
        p = cmd(name, help)
        opts.add(name, p, "--M", default=100, conv=int, dest="M")
        opts.add(name, p, "--Kx", default=150 if name == "exact-recovery" else 100, conv=int, dest="Kx")
        opts.add(name, p, "--Kd", default=50 if name == "exact-recovery" else 100, conv=int, dest="Kd")
        opts.add(name, p, "--sx", default="5,10,15,20" if name == "exact-recovery" else "10", conv=_int_list,
                 help="Sx values: list '5,10' or inclusive range 'a:b[:step]'")
        opts.add(name, p, "--sd", default="5,10,15,20" if name == "exact-recovery" else "10", conv=_int_list)
        opts.add(name, p, "--trials", default=200, conv=int)
        opts.add(name, p, "--algorithms", default=",".join(ALGORITHMS), conv=_algorithms)
        opts.add(name, p, "--coeff-model", default="UNIFORM", conv=lambda v: CoeffModel(str(v).upper()).value,
                 choices=["UNIFORM", "SIGNS", "uniform", "signs"])
        if name == "noisy-recovery":
            opts.add(name, p, "--snr", default="0,5,15,25", conv=_float_list, help="SNR levels in dB")

    p = cmd("phase-transition", "recovery probability over (M, rho) with 0.25/0.5/0.75 contours")
    opts.add("phase-transition", p, "--Kg", default=100, conv=int, dest="Kg")
    opts.add("phase-transition", p, "--Kx", default=50, conv=int, dest="Kx")
    opts.add("phase-transition", p, "--m-range", default="10:100:10", conv=_int_list)
    opts.add("phase-transition", p, "--rho-range", default="0.05:1:0.05", conv=_float_list)
    opts.add("phase-transition", p, "--trials", default=100, conv=int)
    opts.add("phase-transition", p, "--algorithms", default=",".join(ALGORITHMS), conv=_algorithms)
    opts.add("phase-transition", p, "--levels", default="0.25,0.5,0.75", conv=_float_list)

    p = cmd("image-recover", "remove saturation noise from a PGM image")
    opts.add("image-recover", p, "--input", default=None, help="8-bit binary PGM (P5)")
    opts.add("image-recover", p, "--saturation", default=0.1, conv=float, help="fraction of pixels pinned to 255")
    opts.add("image-recover", p, "--algorithm", default="comb-omp", conv=_algorithms,
             help="one algorithm or a comma-separated list")
    opts.add("image-recover", p, "--eps", default=1e-6, conv=float)

    p = cmd("oracle-check", "compare solvers against the exhaustive sparsest solution")
    dictionary_flags("oracle-check", p)
    opts.add("oracle-check", p, "--signal", default=None)
    opts.add("oracle-check", p, "--s-max", default=3, conv=int, help="largest support size enumerated")
    opts.add("oracle-check", p, "--tol", default=1e-6, conv=float)
    return parser, opts


# ---------------------------------------------------------------------------
# resolution


def _split_argv_config(argv: list[str]) -> str | None:
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--config="):
            return a.split("=", 1)[1]
    return None


def _load_config(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    # a config echo nests the options under "options"
    if "options" in data and isinstance(data["options"], dict):
        data = {**data["options"], **({"command": data["command"]} if "command" in data else {})}
    return data


def resolve(argv: list[str]) -> dict:
    """Parse ``argv`` into the fully resolved option dictionary (plus ``command``)."""
    parser, opts = build_parser()
    cfg_path = _split_argv_config(argv)
    cfg = _load_config(cfg_path) if cfg_path else {}
    commands = set(opts.defaults) - {GLOBAL}
    if cfg.get("command") and not any(a in commands for a in argv):
        argv = argv + [str(cfg["command"])]
    ns = vars(parser.parse_args(argv))
    command = ns.pop("command", None)
    if command is None:
        parser.print_usage(sys.stderr)
        raise UsageError("a subcommand is required")
    if cfg.get("command") not in (None, command):
        raise UsageError(f"config is for {cfg['command']!r}, not {command!r}")
    ns.pop("config", None)
    defaults = {**opts.defaults[GLOBAL], **opts.defaults[command]}
    convs = {**opts.converters[GLOBAL], **opts.converters[command]}
    file_opts = {k.replace("-", "_"): v for k, v in cfg.items() if k != "command"}
    unknown = sorted(set(file_opts) - set(defaults))
    if unknown:
        raise UsageError(f"unknown config keys for {command}: {', '.join(unknown)}")
    merged = {**defaults, **file_opts, **ns}
    resolved = {}
    for k, v in merged.items():
        try:
            resolved[k] = v if v is None else convs[k](v)
        except (ValueError, TypeError) as exc:
            raise UsageError(f"--{k.replace('_', '-')}: {exc}") from exc
    resolved["command"] = command
    return resolved


# ---------------------------------------------------------------------------
# output helpers


class _Run:
    def __init__(self, opts: dict):
        self.opts = opts
        self.out_dir = Path(opts["out_dir"]) if opts.get("out_dir") else None
        if self.out_dir is not None:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        self.workers = opts["threads"] or (os.cpu_count() or 1)
        self.timing = not opts["no_timing"]

    def progress(self, msg: str):
        if not self.opts["quiet"]:
            print(msg, file=sys.stderr, flush=True)

    def emit(self, text: str, filename: str | None = None):
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        if self.out_dir is not None and filename:
            (self.out_dir / filename).write_text(text if text.endswith("\n") else text + "\n")

    def write_file(self, filename: str, text: str):
        if self.out_dir is not None:
            (self.out_dir / filename).write_text(text)

    def echo_config(self):
        if self.out_dir is None:
            return
        opts = {k: v for k, v in self.opts.items() if k not in ("command", "out_dir", "quiet")}
        doc = {"command": self.opts["command"], "version": __version__, "options": opts}
        (self.out_dir / f"{self.opts['command']}.config.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _num(v: float) -> str:
    """Locale-independent shortest round-trip text, trimmed to 15 significant digits."""
    v = float(v)
    if not math.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    return repr(float(f"{v:.15g}"))


def _require(opts: dict, *keys: str):
    missing = [k for k in keys if opts.get(k) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _load_dictionary(opts: dict) -> CombinedDictionary:
    A = load_matrix(opts["dict"])
    split = opts["split"]
    if not 0 <= split <= A.shape[1]:
        raise UsageError(f"--split {split} outside [0, {A.shape[1]}]")
    return CombinedDictionary(Dictionary(A), split)


def _load_signal(opts: dict, M: int) -> np.ndarray:
    y = load_matrix(opts["signal"]).ravel()
    if y.shape[0] != M:
        raise ValueError(f"signal has {y.shape[0]} entries, dictionary has {M} rows")
    return y


# ---------------------------------------------------------------------------
# subcommands


def _profile_csv(prof: CoherenceProfile) -> str:
    rows = [("mu_x", prof.mu_x), ("mu_d", prof.mu_d), ("mu_g", prof.mu_g), ("mu_m", prof.mu_m)]
    return "measure,value\n" + "".join(f"{k},{_num(v)}\n" for k, v in rows)


def cmd_coherence(run: _Run) -> int:
    o = run.opts
    if o["patch_side"] is not None:
        if o["patch_side"] < 1:
            raise UsageError("--patch-side must be positive")
        G = patch_dictionary(o["patch_side"])
    else:
        _require(o, "dict")
        G = _load_dictionary(o)
    run.emit(_profile_csv(coherence_profile(G)), "coherence.csv")
    return EXIT_OK


def _fmt_threshold(v) -> str:
    return "inf" if isinstance(v, float) and math.isinf(v) else str(int(v))


def cmd_thresholds(run: _Run) -> int:
    o = run.opts
    given = [o[k] is not None for k in ("mu_x", "mu_d", "mu_g")]
    if all(given):
        prof = CoherenceProfile(o["mu_x"], o["mu_d"], o["mu_g"])
    elif o["dict"] is not None and not any(given):
        prof = coherence_profile(_load_dictionary(o))
    else:
        raise UsageError("give either all of --mu-x/--mu-d/--mu-g or --dict")
    reports = [("NN", threshold_nonneg(prof.mu_x)), ("COMB-OMP", threshold_comb_omp(prof)),
               ("COMB-BP", threshold_comb_bp(prof))]
    csv_text = "algorithm,max_sg,raw_bound,mu_x,mu_d,mu_g\n" + "".join(
        f"{name},{_fmt_threshold(r.max_sg)},{_num(r.raw_bound)},{_num(prof.mu_x)},{_num(prof.mu_d)},{_num(prof.mu_g)}\n"
        for name, r in reports
    )
    run.write_file("thresholds.csv", csv_text)
    if o["format"] == "csv":
        sys.stdout.write(csv_text)
    else:
        lines = [f"{'algorithm':<10} {'max_Sg':>7} {'raw_bound':>12}"]
        lines += [f"{name:<10} {_fmt_threshold(r.max_sg):>7} {_num(round(r.raw_bound, 6)):>12}" for name, r in reports]
        lines.append(f"(mu_x={_num(prof.mu_x)}, mu_d={_num(prof.mu_d)}, mu_g={_num(prof.mu_g)})")
        sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def _solution_csv(sol: SparseSolution, split: int) -> str:
    rows = ["index,value,block"]
    for i in np.flatnonzero(sol.delta):
        rows.append(f"{int(i)},{_num(sol.delta[i])},{'X' if i < split else 'D'}")
    return "\n".join(rows) + "\n"


def _run_recover(G: CombinedDictionary, y: np.ndarray, o: dict) -> SparseSolution:
    M = G.G.shape[0]
    alg = o["algorithm"]
    stop = StoppingCriteria(max_iters=o["max_iters"] or M, residual_tol=o["eps"])
    cfg = PathSolverConfig(residual_tol=o["eps"], max_breakpoints=o["max_breakpoints"],
                           finish_segment=not o["stop_at_eps"])
    if alg == "omp":
        return omp_solve(G.G, y, stop)
    if alg == "comb-omp":
        return comb_omp_solve(G, y, stop, CombOmpOptions(o["constrained_update"], o["debias"]))
    if alg == "nnomp":
        return nn_omp_solve(G.G, y, stop)
    if alg == "bp":
        return bp_solve(G.G, y, cfg)
    if alg == "comb-bp":
        return comb_bp_solve(G, y, cfg)
    return nn_homotopy_solve(G.G, y, cfg)


def cmd_recover(run: _Run) -> int:
    o = run.opts
    _require(o, "dict", "signal")
    G = _load_dictionary(o)
    y = _load_signal(o, G.G.shape[0])
    try:
        sol = _run_recover(G, y, o)
    except PathLimitError as exc:
        run.progress(f"warning: {exc}; reporting the last breakpoint")
        sol = exc.partial
    split = G.kx if o["algorithm"] not in ("nnomp", "nnbp") else G.G.shape[1]
    run.progress(f"termination={sol.termination.value} iterations={sol.iterations} residual={sol.residual_norm:.3e}")
    run.emit(_solution_csv(sol, split), "solution.csv")
    return EXIT_OK


def _grid(run: _Run, snr) -> GridResult:
    o = run.opts
    base = TrialSpec(o["M"], o["Kx"], o["Kd"], min(o["sx"]), min(o["sd"]), CoeffModel(o["coeff_model"]), snr,
                     seed=o["seed"])
    return run_grid(base, o["sx"], o["sd"], o["trials"], o["algorithms"], o["seed"], run.workers, run.timing,
                    run.progress)


def cmd_exact_recovery(run: _Run) -> int:
    run.emit(_grid(run, None).to_csv(), "exact_recovery.csv")
    return EXIT_OK


def cmd_noisy_recovery(run: _Run) -> int:
    combined = GridResult()
    for snr in run.opts["snr"]:
        run.progress(f"SNR {snr} dB")
        combined.rows.extend(_grid(run, snr).rows)
    run.emit(combined.to_csv(), "noisy_recovery.csv")
    return EXIT_OK


def cmd_phase_transition(run: _Run) -> int:
    o = run.opts
    res = run_phase_transition(o["Kg"], o["Kx"], o["m_range"], o["rho_range"], o["trials"], o["algorithms"],
                               o["seed"], run.workers, run.timing, o["levels"], run.progress)
    run.emit(res.grid.to_csv(), "phase_transition.csv")
    run.write_file("contours.csv", _write_csv(CONTOUR_COLUMNS, res.contours))
    return EXIT_OK


def cmd_image_recover(run: _Run) -> int:
    o = run.opts
    _require(o, "input")
    clean = read_pgm(o["input"])
    corrupted, mask = saturate(clean, o["saturation"], o["seed"])
    report = {"input": str(o["input"]), "shape": list(clean.shape), "saturated_pixels": int(mask.sum()),
              "psnr_corrupted": psnr(clean, corrupted), "results": {}}
    if run.out_dir is not None:
        write_pgm(run.out_dir / "corrupted.pgm", corrupted)
    for alg in o["algorithm"]:
        run.progress(f"recovering with {alg}")
        rec = recover_image(corrupted, alg, eps=o["eps"])
        report["results"][alg] = {"psnr_recovered": psnr(clean, rec.image), "stalled_patches": rec.stalled,
                                  "patches": len(rec.solutions)}
        if run.out_dir is not None:
            write_pgm(run.out_dir / f"recovered_{alg}.pgm", rec.image)
    run.emit(json.dumps(report, indent=2, sort_keys=True) + "\n", "image_report.json")
    return EXIT_OK


def cmd_oracle_check(run: _Run) -> int:
    o = run.opts
    _require(o, "dict", "signal")
    G = _load_dictionary(o)
    y = _load_signal(o, G.G.shape[0])
    ref, unique = ml0_search(G, y, o["s_max"], o["tol"])
    verdict: dict[str, Any] = {
        "ml0": {"found": ref.termination.value == "RESIDUAL", "support": list(ref.support), "unique": unique},
        "solvers": {},
    }
    stop = StoppingCriteria(max_iters=G.G.shape[0], residual_tol=o["tol"])
    cfg = PathSolverConfig(residual_tol=o["tol"])
    runs = {"comb-omp": lambda: comb_omp_solve(G, y, stop), "comb-bp": lambda: comb_bp_solve(G, y, cfg)}
    for name, fn in runs.items():
        try:
            sol = fn()
        except PathLimitError as exc:
            sol = exc.partial
        entry = {"support": [int(i) for i in sol.nonzero_support], "termination": sol.termination.value,
                 "matches_ml0": sorted(sol.nonzero_support) == sorted(ref.support)}
        if name == "comb-bp":
            entry["kkt_certified"] = verify_kkt(G, y, sol.delta)[0]
        verdict["solvers"][name] = entry
    if G.kx:
        verdict["nn_singleton_x_block"] = nn_singleton_check(G.X, G.X @ ref.delta[: G.kx], o["tol"]) if ref.support else None
    run.emit(json.dumps(verdict, indent=2, sort_keys=True) + "\n", "oracle_check.json")
    return EXIT_OK


COMMANDS: dict[str, Callable[[_Run], int]] = {
    "coherence": cmd_coherence,
    "thresholds": cmd_thresholds,
    "recover": cmd_recover,
    "exact-recovery": cmd_exact_recovery,
    "noisy-recovery": cmd_noisy_recovery,
    "phase-transition": cmd_phase_transition,
    "image-recover": cmd_image_recover,
    "oracle-check": cmd_oracle_check,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        opts = resolve(argv)
        run = _Run(opts)
        code = COMMANDS[opts["command"]](run)
        run.echo_config()
        return code
    except SystemExit as exc:  # argparse: --help / --version exit 0, usage errors exit 1
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"combsparse: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError, OSError, RuntimeError) as exc:
        print(f"combsparse: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
