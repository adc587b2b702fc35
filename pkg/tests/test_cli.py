from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from combsparse.cli import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, main
from combsparse.dictgen import Dictionary, gaussian_matrix, save_matrix
from combsparse.imaging import read_pgm, write_pgm


@pytest.fixture()
def files(tmp_path):
    G = Dictionary(gaussian_matrix(10, 20, 1)).matrix
    save_matrix(tmp_path / "g.csv", G)
    save_matrix(tmp_path / "y.csv", G[:, 3])
    return tmp_path


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_thresholds_image_setup(capsys):
    code, out, _ = run(capsys, "thresholds", "--mu-x", "0", "--mu-d", "0", "--mu-g", "0.2405")
    assert code == EXIT_OK
    rows = {line.split()[0]: line.split() for line in out.splitlines() if line and not line.startswith("(")}
    assert rows["COMB-OMP"][1] == "2"
    assert rows["COMB-BP"][1] == "3"


def test_thresholds_csv_format(capsys):
    code, out, _ = run(capsys, "thresholds", "--mu-x", "0", "--mu-d", "0", "--mu-g", "0.2405", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {r["algorithm"]: r["max_sg"] for r in rows}["COMB-BP"] == "3"


def test_recover_single_atom(files, capsys):
    code, out, err = run(capsys, "recover", "--dict", str(files / "g.csv"), "--signal", str(files / "y.csv"),
                         "--split", "10", "--algorithm", "comb-omp")
    assert code == EXIT_OK
    assert out == "index,value,block\n3,1.0,X\n"
    assert "RESIDUAL" in err


@pytest.mark.parametrize("alg", ["omp", "comb-omp", "bp", "comb-bp", "nnomp", "nnbp", "combbp", "nn-omp"])
def test_recover_every_algorithm(files, capsys, alg):
    code, out, _ = run(capsys, "recover", "--dict", str(files / "g.csv"), "--signal", str(files / "y.csv"),
                       "--split", "10", "--algorithm", alg)
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["index"] for r in rows] == ["3"]
    assert float(rows[0]["value"]) == pytest.approx(1.0, abs=1e-5)


def test_coherence_patch_dictionary(capsys):
    code, out, _ = run(capsys, "coherence", "--patch-side", "8")
    vals = dict(line.split(",") for line in out.splitlines()[1:])
    assert float(vals["mu_g"]) == pytest.approx(0.2405, abs=1e-4)


def test_usage_errors_exit_1(capsys):
    assert run(capsys, "bogus")[0] == EXIT_USAGE
    assert run(capsys, "thresholds", "--nope")[0] == EXIT_USAGE
    assert run(capsys, "exact-recovery", "--trials", "abc")[0] == EXIT_USAGE
    code, _, err = run(capsys)
    assert code == EXIT_USAGE


def test_runtime_errors_exit_2(files, capsys):
    code, out, err = run(capsys, "recover", "--dict", str(files / "missing.csv"), "--signal", str(files / "y.csv"))
    assert code == EXIT_RUNTIME and out == "" and "missing.csv" in err


def test_unknown_config_key_is_usage_error(tmp_path, capsys):
    (tmp_path / "c.json").write_text(json.dumps({"command": "thresholds", "options": {"bogus": 1}}))
    assert run(capsys, "--config", str(tmp_path / "c.json"), "thresholds")[0] == EXIT_USAGE


def grid_args(out_dir):
    return ["--seed", "9", "--no-timing", "--quiet", "--out-dir", str(out_dir), "exact-recovery",
            "--M", "20", "--Kx", "20", "--Kd", "20", "--sx", "1:2", "--sd", "1", "--trials", "3"]


def test_repeated_runs_byte_identical_and_replayable(tmp_path, capsys):
    assert run(capsys, *grid_args(tmp_path / "a"))[0] == EXIT_OK
    first = capsys.readouterr()
    assert run(capsys, *grid_args(tmp_path / "b"))[0] == EXIT_OK
    a = (tmp_path / "a" / "exact_recovery.csv").read_bytes()
    b = (tmp_path / "b" / "exact_recovery.csv").read_bytes()
    assert a == b
    rows = list(csv.reader(io.StringIO(a.decode())))
    assert rows[0][:5] == ["M", "Kx", "Kd", "Sx", "Sd"] and len(rows) == 1 + 2 * 4
    cfg = tmp_path / "a" / "exact-recovery.config.json"
    echo = json.loads(cfg.read_text())
    assert echo["command"] == "exact-recovery" and echo["options"]["seed"] == 9
    assert run(capsys, "--config", str(cfg), "--out-dir", str(tmp_path / "c"), "exact-recovery")[0] == EXIT_OK
    assert (tmp_path / "c" / "exact_recovery.csv").read_bytes() == a


def test_flags_override_config(tmp_path, capsys):
    run(capsys, *grid_args(tmp_path / "a"))
    cfg = tmp_path / "a" / "exact-recovery.config.json"
    run(capsys, "--config", str(cfg), "--out-dir", str(tmp_path / "d"), "exact-recovery", "--trials", "2")
    rows = list(csv.DictReader(open(tmp_path / "d" / "exact_recovery.csv")))
    assert {r["trials"] for r in rows} == {"2"}


def test_noisy_and_phase_transition_outputs(tmp_path, capsys):
    code, out, _ = run(capsys, "--no-timing", "--quiet", "--out-dir", str(tmp_path), "noisy-recovery",
                       "--M", "20", "--Kx", "20", "--Kd", "20", "--sx", "2", "--sd", "2", "--trials", "2",
                       "--snr", "0,25", "--algorithms", "omp,comb-omp")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert sorted({r["snr_db"] for r in rows}) == ["0.0", "25.0"]
    code, out, _ = run(capsys, "--no-timing", "--quiet", "--out-dir", str(tmp_path), "phase-transition",
                       "--Kg", "40", "--Kx", "20", "--m-range", "10:20:10", "--rho-range", "0.1,0.5",
                       "--trials", "2", "--algorithms", "bp,comb-bp")
    assert code == EXIT_OK
    assert (tmp_path / "phase_transition.csv").exists()
    contours = list(csv.DictReader(open(tmp_path / "contours.csv")))
    assert {r["level"] for r in contours} == {"0.25", "0.5", "0.75"}


def test_image_recover(tmp_path, capsys):
    img = np.tile(np.linspace(40, 200, 16), (16, 1))
    write_pgm(tmp_path / "in.pgm", img)
    code, out, _ = run(capsys, "--seed", "1", "--quiet", "--out-dir", str(tmp_path / "o"), "image-recover",
                       "--input", str(tmp_path / "in.pgm"), "--saturation", "0.1", "--algorithm", "comb-omp,omp")
    assert code == EXIT_OK
    report = json.loads((tmp_path / "o" / "image_report.json").read_text())
    assert set(report["results"]) == {"comb-omp", "omp"}
    assert report["results"]["comb-omp"]["stalled_patches"] == 0 and report["saturated_pixels"] == 25
    assert read_pgm(tmp_path / "o" / "recovered_comb-omp.pgm").shape == (16, 16)
    assert read_pgm(tmp_path / "o" / "corrupted.pgm").shape == (16, 16)


def test_oracle_check(files, capsys):
    code, out, _ = run(capsys, "oracle-check", "--dict", str(files / "g.csv"), "--signal", str(files / "y.csv"),
                       "--split", "10", "--s-max", "2")
    verdict = json.loads(out)
    assert code == EXIT_OK
    assert verdict["ml0"]["support"] == [3] and verdict["ml0"]["unique"]
    assert all(v["matches_ml0"] for v in verdict["solvers"].values())
    assert verdict["solvers"]["comb-bp"]["kkt_certified"]


def test_module_entry_point(files):
    p = subprocess.run([sys.executable, "-m", "combsparse", "thresholds", "--mu-x", "0.01", "--mu-d", "0", "--mu-g", "0"],
                       capture_output=True, text=True)
    assert p.returncode == 0 and "NN" in p.stdout
    p = subprocess.run([sys.executable, "-m", "combsparse", "nope"], capture_output=True, text=True)
    assert p.returncode == 1 and "usage" in p.stderr


def test_recover_stop_at_eps(files, capsys):
    args = ["recover", "--dict", str(files / "g.csv"), "--signal", str(files / "y.csv"), "--split", "10",
            "--algorithm", "comb-bp", "--eps", "0.1"]
    _, stopped, _ = run(capsys, *args, "--stop-at-eps")
    _, finished, _ = run(capsys, *args)
    # single-atom path: the coefficient stops shrunk by the residual aim 0.999 * eps
    assert float(stopped.splitlines()[1].split(",")[1]) == pytest.approx(1 - 0.0999, abs=1e-9)
    assert finished == "index,value,block\n3,1.0,X\n"
