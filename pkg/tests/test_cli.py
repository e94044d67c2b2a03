import json
import subprocess
import sys

import numpy as np
import pytest

from riccati_families.cli import main

from conftest import Q0, Q1, JORDAN_A


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


@pytest.fixture
def jordan_file(tmp_path):
    return write(tmp_path, "jordan.json", {"A": JORDAN_A.tolist(), "B": np.eye(4).tolist()})


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out else None), err


class TestSpectrum:
    def test_jordan(self, capsys, jordan_file):
        code, rep, _ = run(capsys, "spectrum", jordan_file)
        assert code == 0
        assert rep["command"] == "spectrum"
        assert rep["spectrum"]["reciprocal_pairs"] == [[[0.5, 0.0], [2.0, 0.0]]]
        assert rep["spectrum"]["at_most_one_simple_pair"] is False
        assert rep["spectrum"]["reachable"] is True
        assert rep["tolerances"] == {"rank_tol": 1e-10, "resid_tol": 1e-8, "sym_tol": 1e-10}

    def test_unmixed(self, capsys, tmp_path):
        f = write(tmp_path, "d.json", {"A": [[2, 0], [0, 3]], "B": [[1], [1]]})
        code, rep, _ = run(capsys, "spectrum", f)
        assert code == 0 and rep["spectrum"]["is_unmixed"] is True


class TestInputErrors:
    @pytest.mark.parametrize("doc", [
        '{"A": [[1, 2], [3]], "B": [[1], [1]]}',
        '{"A": [[1, 0], [0, 1]], "B": [[1], [1], [1]]}',
        '{"A": [[1, NaN], [0, 1]], "B": [[1], [1]]}',
        '{"A": [[1, Infinity], [0, 1]], "B": [[1], [1]]}',
        '{"A": [[1, "x"], [0, 1]], "B": [[1], [1]]}',
        '{"A": [[1, true], [0, 1]], "B": [[1], [1]]}',
        '{"A": [[2, 0], [0, 3]], "B": [[1], [1]], "R": [[1, 0], [0, 1]]}',
        '{"A": [[2, 0], [0, 3]], "B": [[1], [1]], "R": [[-1]]}',
        '{"A": [[2, 0], [0, 3]], "B": [[1], [1]], "tolerances": {"resid_tol": 2}}',
        '{"A": [[2, 0], [0, 3]], "B": [[1], [1]], "tolerances": {"bogus": 1e-3}}',
        '{"A": [[2, 0], [0, 3]]}',
        '{"A": [], "B": []}',
        '[1, 2]',
        'not json',
    ])
    def test_rejected(self, capsys, tmp_path, doc):
        code, rep, err = run(capsys, "spectrum", write(tmp_path, "bad.json", doc))
        assert code == 2 and rep is None and err.startswith("error:")

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "spectrum", str(tmp_path / "nope.json"))
        assert code == 2 and "cannot read" in err

    def test_classify_needs_solution(self, capsys, jordan_file):
        assert run(capsys, "classify", jordan_file)[0] == 2

    def test_solution_shape(self, capsys, tmp_path, jordan_file):
        q = write(tmp_path, "q.json", [[1, 0], [0, 1]])
        assert run(capsys, "verify", jordan_file, "--solution", q)[0] == 2

    def test_singular_A_for_stein(self, capsys, tmp_path):
        f = write(tmp_path, "s.json", {"A": [[0, 0], [0, 2]], "B": [[1, 0], [0, 1]]})
        assert run(capsys, "stein", f)[0] == 2


class TestStein:
    def test_split_spectrum(self, capsys, tmp_path):
        f = write(tmp_path, "s.json", {"A": [[2, 0], [0, 0.5]], "B": [[1, 0], [0, 1]]})
        code, rep, _ = run(capsys, "stein", f)
        assert code == 0 and rep["exists"]
        assert np.allclose(rep["P0"], np.diag([1 / 3, -4 / 3]))
        assert np.allclose(np.abs(rep["delta_basis"][0]), np.array([[0, 1], [1, 0]]) / np.sqrt(2))

    def test_inconsistent(self, capsys, tmp_path):
        f = write(tmp_path, "s.json", {"A": [[2, 0], [0, 0.5]], "B": [[1], [1]], "R": [[1]]})
        code, rep, _ = run(capsys, "stein", f)
        assert code == 1 and rep["exists"] is False

    def test_scalar(self, capsys, tmp_path):
        f = write(tmp_path, "s.json", {"A": [[2]], "B": [[1]], "R": [[1]]})
        code, rep, _ = run(capsys, "stein", f)
        assert code == 0 and rep["P0"][0][0] == pytest.approx(1 / 3) and rep["delta_basis"] == []


class TestFamilies:
    def test_unmixed(self, capsys, tmp_path):
        f = write(tmp_path, "d.json", {"A": [[2, 0], [0, 3]], "B": [[1, 0], [0, 1]]})
        code, rep, _ = run(capsys, "families", f)
        assert code == 0 and len(rep["solutions"]) == 4

    def test_split_spectrum(self, capsys, tmp_path):
        f = write(tmp_path, "s.json", {"A": [[2, 0], [0, 0.5]], "B": [[1, 0], [0, 1]]})
        code, rep, _ = run(capsys, "families", f, "--samples", "5")
        assert code == 0 and len(rep["solutions"]) >= 7

    def test_jordan(self, capsys, jordan_file):
        code, rep, _ = run(capsys, "families", jordan_file, "--samples", "2")
        Qs = [np.array(s["Q"]) for s in rep["solutions"]]
        assert any(np.allclose(Q, Q0, atol=1e-10) for Q in Qs)
        assert not any(np.allclose(Q, Q1, atol=1e-6) for Q in Qs)

    def test_derogatory_warns(self, capsys, tmp_path):
        f = write(tmp_path, "d.json", {"A": [[2, 0, 0], [0, 2, 0], [0, 0, 3]],
                                       "B": [[1, 0, 0], [0, 1, 0], [1, 1, 1]]})
        code, rep, err = run(capsys, "families", f)
        assert code == 0 and rep["lattice_completeness"] == "user-supplied-only"
        assert rep["warnings"] and "warning:" in err

    def test_no_stein_solution(self, capsys, tmp_path):
        f = write(tmp_path, "s.json", {"A": [[2, 0], [0, 0.5]], "B": [[1], [1]]})
        assert run(capsys, "families", f)[0] == 1

    def test_deterministic(self, capsys, jordan_file):
        first = run(capsys, "families", jordan_file, "--seed", "4")[1]
        second = run(capsys, "families", jordan_file, "--seed", "4")[1]
        assert first == second

    def test_seed_from_file(self, capsys, tmp_path):
        f = write(tmp_path, "s.json", {"A": JORDAN_A.tolist(), "B": np.eye(4).tolist(), "seed": 9})
        assert run(capsys, "families", f)[1]["seed"] == 9


class TestClassifyVerify:
    @pytest.mark.parametrize("Q, verdict, code", [
        (Q1, "spurious", 1), (Q0, "in-family", 0), (np.eye(4), "not-a-solution", 3)])
    def test_classify(self, capsys, tmp_path, jordan_file, Q, verdict, code):
        q = write(tmp_path, "q.json", {"Q": Q.tolist()})
        got, rep, _ = run(capsys, "classify", jordan_file, "--solution", q)
        assert got == code and rep["verdict"] == verdict

    def test_spurious_reports_fixed_entry(self, capsys, tmp_path, jordan_file):
        q = write(tmp_path, "q.json", Q1.tolist())
        rep = run(capsys, "classify", jordan_file, "--solution", q)[1]
        entries = {tuple(e["index"]): e["value"] for e in rep["fixed_entries"]}
        assert entries[(1, 2)] == pytest.approx(2.0, abs=1e-8)

    @pytest.mark.parametrize("Q, code", [(Q0, 0), (np.zeros((4, 4)), 0), (np.eye(4), 3)])
    def test_verify(self, capsys, tmp_path, jordan_file, Q, code):
        q = write(tmp_path, "q.json", Q.tolist())
        got, rep, _ = run(capsys, "verify", jordan_file, "--solution", q)
        assert got == code and rep["is_solution"] == (code == 0)

    def test_tol_flag(self, capsys, tmp_path, jordan_file):
        q = write(tmp_path, "q.json", (Q0 + 1e-5).tolist())
        assert run(capsys, "verify", jordan_file, "--solution", q)[0] == 3
        code, rep, _ = run(capsys, "verify", jordan_file, "--solution", q, "--tol", "1e-2")
        assert code == 0 and rep["tolerances"]["resid_tol"] == 1e-2


def test_matrices_round_trip_bit_identically(capsys, jordan_file, tmp_path):
    rep = run(capsys, "stein", jordan_file)[1]
    P = np.array(rep["P0"])
    # re-serializing what was parsed gives the same bits
    again = np.array(json.loads(json.dumps(P.tolist())))
    assert np.array_equal(P.view(np.uint64), again.view(np.uint64))
    # and the emitted P0 is the library's value to the last bit
    from riccati_families import HareProblem, solve_stein_set
    ref = solve_stein_set(HareProblem(JORDAN_A, np.eye(4))).particular
    assert np.array_equal(P, ref)


def test_module_entry_point(jordan_file):
    proc = subprocess.run([sys.executable, "-m", "riccati_families", "spectrum", jordan_file],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "spectrum"
