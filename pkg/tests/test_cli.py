import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from frpca.cli import main
from frpca.mmio import load_matrix_market, write_matrix_market
from frpca.sparse import SparseMatrixCSR
from frpca.synthetic import random_sparse


@pytest.fixture
def diag_file(tmp_path):
    path = tmp_path / "diag.mtx"
    write_matrix_market(path, SparseMatrixCSR.from_dense(np.diag([5.0, 4.0, 3.0, 2.0, 1.0])))
    return path


@pytest.fixture
def tall_file(tmp_path):
    path = tmp_path / "tall.mtx"
    write_matrix_market(path, random_sparse(300, 200, 12, seed=1))
    return path


def read_s(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["index", "singular_value"]
    return np.array([float(r[1]) for r in rows[1:]])


def test_run_on_diagonal(diag_file, tmp_path):
    out = tmp_path / "o"
    code = main(["run", str(diag_file), "--algorithm", "auto", "--k", "2", "--q", "6",
                 "--oversample", "3", "--out-prefix", str(out)])
    assert code == 0
    np.testing.assert_allclose(read_s(f"{out}.S.csv"), [5, 4], atol=1e-8)
    man = json.loads((tmp_path / "o.manifest.json").read_text())
    assert man["passes"] == 6 and man["resolved_algorithm"] == "frpcat"
    assert all(v >= 0 for v in man["timings_seconds"].values())


def test_run_default_oversample_too_large_for_5x5(diag_file, tmp_path):
    code = main(["run", str(diag_file), "--k", "2", "--q", "6", "--out-prefix", str(tmp_path / "x")])
    assert code == 2


def test_run_manifest_keeps_configuration(tall_file, tmp_path):
    out = tmp_path / "cfg"
    assert main(["run", str(tall_file), "--algorithm", "auto", "--k", "100", "--q", "11",
                 "--oversample", "5", "--save-vectors", "--compare-oracle",
                 "--out-prefix", str(out)]) == 0
    man = json.loads((tmp_path / "cfg.manifest.json").read_text())
    assert (man["k"], man["s"], man["q"], man["passes"]) == (100, 5, 11, 11)
    assert man["peak_memory_estimate"]["bytes"] > 0
    U = np.loadtxt(f"{out}.U.csv", delimiter=",", skiprows=1)
    assert U.shape == (300, 100)
    acc = json.loads((tmp_path / "cfg.accuracy.json").read_text())
    assert max(acc["singular_value_rel_err"][:20]) < 1e-3


def test_run_baseline_pass_count(tall_file, tmp_path):
    out = tmp_path / "b"
    assert main(["run", str(tall_file), "--algorithm", "basic", "--k", "10", "--p", "3",
                 "--out-prefix", str(out)]) == 0
    assert json.loads((tmp_path / "b.manifest.json").read_text())["passes"] == 8


def test_exit_codes(tall_file, tmp_path, capsys):
    pre = str(tmp_path / "e")
    assert main(["run", str(tall_file), "--algorithm", "eigsvds", "--k", "5", "--gram-limit", "100",
                 "--out-prefix", pre]) == 4
    assert "memory guard" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.mtx"), "--k", "2", "--q", "4"]) == 3
    bad = tmp_path / "bad.mtx"
    bad.write_text("garbage\n")
    assert main(["run", str(bad), "--k", "2", "--q", "4"]) == 3
    assert main(["run", str(tall_file), "--algorithm", "frpca", "--k", "5", "--out-prefix", pre]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["run", str(tall_file), "--bogus"])
    assert exc.value.code == 2


def test_rank_deficiency_exit(tmp_path):
    path = tmp_path / "r1.mtx"
    write_matrix_market(path, SparseMatrixCSR.from_dense(np.outer(np.arange(1, 9), np.ones(6))))
    assert main(["run", str(path), "--algorithm", "frpcat", "--k", "2", "--oversample", "1",
                 "--q", "4", "--out-prefix", str(tmp_path / "r")]) == 4


def test_gen(tmp_path):
    dense = tmp_path / "d.mtx"
    assert main(["gen", "--rows", "100", "--cols", "100", "--nnz-per-row", "100",
                 "--out", str(dense)]) == 0
    assert load_matrix_market(dense).nnz == 10_000
    shaped = tmp_path / "s.mtx"
    assert main(["gen", "--rows", "200", "--cols", "150", "--nnz-per-row", "15",
                 "--spectrum", "geometric:0.9", "--seed", "3", "--out", str(shaped)]) == 0
    S = np.linalg.svd(load_matrix_market(shaped).toarray(), compute_uv=False)
    assert abs(S[9] - 0.9**9) < 0.1 * 0.9**9
    assert main(["gen", "--rows", "10", "--cols", "10", "--nnz-per-row", "0",
                 "--out", str(tmp_path / "z.mtx")]) == 2


def test_sparsify(tmp_path, capsys):
    src = tmp_path / "a.mtx"
    write_matrix_market(src, random_sparse(400, 300, 97, seed=2))
    same = tmp_path / "same.mtx"
    assert main(["sparsify", str(src), "--keep", "1.0", "--out", str(same)]) == 0
    a, b = load_matrix_market(src), load_matrix_market(same)
    assert a.values.tobytes() == b.values.tobytes() and a.col_idx.tobytes() == b.col_idx.tobytes()
    q = tmp_path / "q.mtx"
    assert main(["sparsify", str(src), "--keep", "0.25", "--seed", "1", "--out", str(q)]) == 0
    assert abs(load_matrix_market(q).nnz / 400 - 24.25) < 0.5
    assert main(["sparsify", str(src), "--keep", "0", "--out", str(q)]) == 2


def test_bench(tall_file, tmp_path):
    out = tmp_path / "bench.csv"
    assert main(["bench", str(tall_file), "--algorithms", "basic,frpcat", "--q-list", "2,4,6,9,11",
                 "--k", "10", "--repeats", "3", "--out", str(out)]) == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 10
    fast = [r for r in rows if r["algorithm"] == "frpcat"]
    assert [int(r["q"]) for r in fast] == [2, 4, 6, 9, 11]
    assert [int(r["passes"]) for r in fast] == [2, 4, 6, 9, 11]
    base = [r for r in rows if r["algorithm"] == "basic"]
    assert all(float(r["speedup_vs_first"]) == 1.0 for r in base)
    assert all(r["reference"] == "oracle" for r in rows)


def test_model_json_and_csv(capsys):
    assert main(["model", "--m", "82168", "--n", "82168", "--t", "12", "--k", "100",
                 "--q", "12"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["beta"] == 1.0
    assert rep["sp1_limit"] == pytest.approx(8.3256, abs=1e-4)
    assert main(["model", "--m", "1000", "--n", "500", "--nnz", "5000", "--k", "20", "--p", "5",
                 "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "quantity,value" and any(l.startswith("sp1_limit,") for l in lines)
    assert main(["model", "--m", "10", "--n", "10", "--k", "2", "--q", "4"]) == 2


def test_module_entry_point(diag_file, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "frpca", "run", str(diag_file), "--k", "2",
                           "--q", "6", "--oversample", "3", "--out-prefix", str(tmp_path / "m")],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
