from __future__ import annotations

import csv
import io
import math

import numpy as np
import pytest

from combsparse.bench import (
    CONTOUR_COLUMNS,
    GRID_COLUMNS,
    PT_COLUMNS,
    CoeffModel,
    TrialSpec,
    contour_crossing,
    plant_instance,
    rre,
    run_grid,
    run_phase_transition,
    run_trial,
    solve,
    sparsity_from_rho,
    split_sparsity,
    stopping_tolerance,
    trial_rng,
)
from combsparse.dictgen import CombinedDictionary, Dictionary


def test_rre_examples():
    d = np.array([0.3, -1.0, 2.0])
    assert rre(d, d) == 0.0
    assert rre(np.zeros(3), d) == 1.0
    assert rre([1.0, 1.0], [1.0, 0.0]) == 1.0
    with pytest.raises(ValueError):
        rre([1.0], [0.0])
    with pytest.raises(ValueError):
        rre([1.0, 2.0], [1.0])


def test_trial_spec_guards():
    with pytest.raises(ValueError):
        TrialSpec(10, 5, 5, 6, 0)
    with pytest.raises(ValueError):
        TrialSpec(4, 5, 5, 3, 3)
    assert TrialSpec(10, 5, 5, 1, 1, coeff_model="SIGNS").coeff_model is CoeffModel.SIGNS


def test_plant_signs_model():
    spec = TrialSpec(30, 20, 20, 2, 3, coeff_model=CoeffModel.SIGNS)
    G, y, d = plant_instance(spec, trial_rng(0, 1))
    alpha, beta = d[:20], d[20:]
    assert np.array_equal(alpha[alpha != 0], [1.0, 1.0])
    assert set(np.abs(beta[beta != 0])) == {1.0} and np.count_nonzero(beta) == 3
    assert np.array_equal(y, G.matrix @ d)


def test_plant_uniform_model_ranges():
    spec = TrialSpec(50, 40, 40, 10, 10)
    for t in range(20):
        _, _, d = plant_instance(spec, trial_rng(1, t))
        a, b = d[:40][d[:40] != 0], d[40:][d[40:] != 0]
        assert a.size == 10 and b.size == 10
        assert np.all((a > 0) & (a < 1)) and np.all((b > -1) & (b < 1))


@pytest.mark.parametrize("snr", [0.0, 5.0, 25.0])
def test_snr_exact_per_realization(snr):
    spec = TrialSpec(40, 20, 20, 3, 3, snr_db=snr)
    G, y, d = plant_instance(spec, trial_rng(2, 0))
    s = G.matrix @ d
    n = y - s
    assert 10 * math.log10((s @ s) / (n @ n)) == pytest.approx(snr, abs=1e-10)
    if snr == 0.0:
        assert np.linalg.norm(n) == pytest.approx(np.linalg.norm(s), rel=1e-12)
    assert stopping_tolerance(G, y, d) == pytest.approx(np.linalg.norm(n))


def test_trial_rng_independent_of_call_order():
    a = trial_rng(7, 100, 5, 5, 3).standard_normal(4)
    trial_rng(7, 100, 5, 5, 2).standard_normal(100)
    assert np.array_equal(a, trial_rng(7, 100, 5, 5, 3).standard_normal(4))
    assert not np.array_equal(a, trial_rng(7, 100, 5, 5, 4).standard_normal(4))


def test_solve_dispatch_and_unknown():
    G = CombinedDictionary(Dictionary(np.eye(4)), 2)
    y = np.array([1.0, 0.0, -2.0, 0.0])
    for alg in ("omp", "comb-omp", "bp", "comb-bp"):
        np.testing.assert_allclose(solve(alg, G, y).delta, y, atol=1e-5)
    with pytest.raises(ValueError):
        solve("lasso", G, y)


def test_run_trial_shares_instance_across_algorithms():
    recs = run_trial(TrialSpec(40, 40, 40, 2, 2), ["omp", "comb-omp", "bp", "comb-bp"], trial_rng(3, 0))
    assert [r.spec.algorithm for r in recs] == ["omp", "comb-omp", "bp", "comb-bp"]
    for r in recs:
        assert r.exact == (r.rre < 1e-6)


def test_grid_single_trial_guarantee_regime():
    res = run_grid(TrialSpec(100, 100, 100, 1, 0), [1], [0], trials=1, algorithms=["comb-omp", "comb-bp"], master_seed=4)
    assert [r["p_exact"] for r in res.rows] == [1.0, 1.0]


def test_grid_csv_schema_and_determinism():
    base = TrialSpec(30, 30, 30, 0, 0)
    kw = dict(trials=4, algorithms=["omp", "comb-omp"], master_seed=5, timing=False)
    a = run_grid(base, [1, 2], [1, 2], workers=1, **kw).to_csv()
    b = run_grid(base, [1, 2], [1, 2], workers=2, **kw).to_csv()
    assert a == b
    rows = list(csv.reader(io.StringIO(a)))
    assert rows[0] == GRID_COLUMNS
    assert len(rows) == 1 + 4 * 2
    assert all(r[GRID_COLUMNS.index("mean_ms")] == "0.0" for r in rows[1:])
    with pytest.raises(ValueError):
        run_grid(base, [], [1], trials=1)


def test_noise_lowers_error_monotonically():
    out = {}
    for snr in (0.0, 15.0):
        res = run_grid(TrialSpec(60, 60, 60, 5, 5, snr_db=snr), [5], [5], trials=20, master_seed=6,
                       algorithms=["omp", "comb-omp"], timing=False)
        out[snr] = {r["algorithm"]: r["mean_rre"] for r in res.rows}
    for alg in ("omp", "comb-omp"):
        assert out[15.0][alg] < out[0.0][alg]


# --------------------------------------------------------------- phase transition


def test_sparsity_rounding_and_split():
    assert sparsity_from_rho(0.05, 10) == 1
    assert sparsity_from_rho(0.25, 10) == 3  # 2.5 rounds half up
    assert sparsity_from_rho(0.5, 20) == 10
    rng = np.random.default_rng(0)
    for _ in range(200):
        sx, sd = split_sparsity(9, 5, 5, rng)
        assert sx + sd == 9 and 4 <= sx <= 5


def test_contour_crossing():
    assert contour_crossing([1, 2, 3], [1.0, 0.6, 0.2], 0.5) == pytest.approx(2.25)
    assert contour_crossing([1, 2], [1.0, 1.0], 0.5) == 2.0
    assert contour_crossing([2], [0.0], 0.5) == pytest.approx(1.0)


def test_phase_transition_easy_corner_and_monotone():
    res = run_phase_transition(60, 30, [40], [0.05, 0.2, 0.4, 0.6, 0.8], trials=20, master_seed=7, timing=False)
    rows = res.grid.rows
    for alg in ("omp", "comb-omp", "bp", "comb-bp"):
        ps = [r["p_exact"] for r in rows if r["algorithm"] == alg]
        assert ps[0] == 1.0
        assert all(b <= a + 0.05 for a, b in zip(ps, ps[1:]))
    text = res.grid.to_csv()
    assert text.splitlines()[0].split(",") == PT_COLUMNS
    assert res.contours_csv().splitlines()[0].split(",") == CONTOUR_COLUMNS
    assert set(res.contour("bp")) == {40}
