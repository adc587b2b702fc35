"""Sparse recovery with combined non-negative and unconstrained dictionaries.

A signal ``y`` is coded over ``G = [X | D]`` as ``y = X alpha + D beta`` with
``alpha >= 0`` and ``beta`` free. The package provides greedy pursuit
(OMP, NN-OMP, COMB-OMP), l1 pursuit through a non-negative homotopy path
(BP, NN-BP, COMB-BP), constrained least squares (NNLS, LSI), coherence-based
recovery thresholds, a brute-force sparsest-solution oracle, Monte-Carlo
benchmarks and a saturation-noise image demo.

The inner loops of the two path solvers run in a compiled extension when it
is built; otherwise a pure-Python implementation with identical results is
used. See :func:`combsparse.backend_name`.
"""

from __future__ import annotations

__version__ = "0.1.0"

from ._backend import available as available_backends
from ._backend import name as backend_name
from ._backend import use as use_backend
from .bench import (
    CoeffModel,
    GridResult,
    PhaseTransitionResult,
    TrialRecord,
    TrialSpec,
    plant_instance,
    rre,
    run_grid,
    run_phase_transition,
)
from .bounds import (
    ThresholdReport,
    comb_bp_condition,
    comb_omp_first_step_condition,
    comb_omp_full_condition,
    exact_recovery_condition,
    full_rank_condition,
    threshold_comb_bp,
    threshold_comb_omp,
    threshold_nonneg,
    threshold_reduced_nonneg,
)
from .convex import PathLimitError, PathSolverConfig, bp_solve, comb_bp_solve, nn_homotopy_solve, verify_kkt
from .dictgen import (
    CoherenceProfile,
    CombinedDictionary,
    Dictionary,
    DictionaryError,
    coherence,
    coherence_profile,
    cross_coherence,
    dct2d_dictionary,
    gaussian_dictionary,
    is_m_plus,
    load_matrix,
    negated_identity,
    one_sided_coherence,
    save_matrix,
)
from .greedy import CombOmpOptions, comb_omp_solve, nn_omp_solve, omp_solve
from .imaging import psnr, read_pgm, recover_image, saturate, write_pgm
from .linalg import LeastSquaresResult, LinAlgError, lsi_solve, nnls_solve, solve_ls
from .oracle import ml0_search, nn_singleton_check
from .solution import SparseSolution, StoppingCriteria, Termination
