import json
import subprocess
import sys

import numpy as np
import pytest

from spectralfield.cli import dumps_report, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out else None)


class TestEval:
    def test_cubic(self, capsys):
        code, rep = run_cli(capsys, "eval", "--builtin", "cubic", "--point", "1,0")
        assert code == 0
        dec = rep["outputs"]["decomposition"]
        assert dec["eigenvalues"] == [-1.0, 1.0]
        assert dec["groups"][0]["projection"] == [[0.0, 0.0], [0.0, 1.0]]

    def test_quartic_origin(self, capsys):
        code, rep = run_cli(capsys, "eval", "--builtin", "quartic", "--point", "0,0")
        dec = rep["outputs"]["decomposition"]
        assert code == 0 and dec["s"] == 1
        (g,) = dec["groups"]
        assert g["value"] == 0.0 and g["multiplicity"] == 2
        assert g["projection"] == [[1.0, 0.0], [0.0, 1.0]]
        assert rep["outputs"]["index_reports"][0]["j_star_hi"] == 2

    def test_malformed_json(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"n": 2,\n "potential": [')
        code, rep = run_cli(capsys, "eval", "--spec", str(path), "--point", "1,0")
        assert code == 1
        assert rep["error"] == "field_spec" and rep["line"] == 2

    def test_spec_file(self, capsys, tmp_path):
        path = tmp_path / "cubic.json"
        path.write_text(json.dumps({"n": 2, "potential": [{"c": 1 / 6, "e": [3, 0]}, {"c": -0.5, "e": [1, 2]}]}))
        code, rep = run_cli(capsys, "eval", "--spec", str(path), "--point", "1,0")
        assert code == 0
        assert rep["outputs"]["decomposition"]["eigenvalues"] == pytest.approx([-1.0, 1.0], abs=1e-15)

    @pytest.mark.parametrize(
        "argv",
        [
            ["eval", "--builtin", "cubic", "--point", "1"],
            ["eval", "--builtin", "cubic"],
            ["eval", "--point", "1,0"],
            ["eval", "--builtin", "cubic", "--point", "a,b"],
            ["eval", "--builtin", "nope", "--point", "1,0"],
            ["derive", "--builtin", "cubic", "--point", "1,0", "--j", "3"],
            ["frobnicate"],
        ],
    )
    def test_input_errors(self, capsys, argv):
        assert main(argv) == 1
        capsys.readouterr()

    def test_missing_spec_file(self, capsys, tmp_path):
        assert main(["eval", "--spec", str(tmp_path / "missing.json"), "--point", "1,0"]) == 1
        assert "cannot read" in capsys.readouterr().err


class TestDerive:
    def test_quartic_validate(self, capsys):
        code, rep = run_cli(capsys, "derive", "--builtin", "quartic", "--point", "1,0", "--j", "2",
                            "--grad", "--hess", "--validate")
        assert code == 0
        np.testing.assert_allclose(rep["outputs"]["grad"], [2, 0], atol=1e-14)
        np.testing.assert_allclose(rep["outputs"]["hess"], 2 * np.eye(2), atol=1e-13)
        assert rep["max_discrepancy"] < 1e-6
        assert all(c["passed"] for c in rep["validation"].values())

    def test_cubic_crossing(self, capsys):
        code, rep = run_cli(capsys, "derive", "--builtin", "cubic", "--point", "0,0", "--j", "1", "--grad")
        assert code == 2
        assert rep["error"] == "crossing"
        assert rep["witness"]["point"] == [0.0, 0.0] and rep["witness"]["multiplicity"] == 2

    def test_dproj(self, capsys):
        code, rep = run_cli(capsys, "derive", "--builtin", "cubic", "--point", "1,0", "--j", "2",
                            "--dproj", "--e", "0,1", "--validate")
        assert code == 0
        # P_2 of the cubic turns at rate 1/2 along y at (1,0)
        np.testing.assert_allclose(rep["outputs"]["dproj"], [[0, -0.5], [-0.5, 0]], atol=1e-14)

    def test_jacobian_and_second(self, capsys):
        code, rep = run_cli(capsys, "derive", "--builtin", "quartic", "--point", "1,0", "--j", "2",
                            "--dproj", "--q", "1,0", "--second", "--a", "0,1", "--b", "0,1", "--validate")
        assert code == 0
        np.testing.assert_allclose(rep["outputs"]["jac_dproj"], [[0, 0], [0, -1]], atol=1e-14)
        assert rep["outputs"]["second"] == pytest.approx(2.0)

    def test_validation_inconclusive_near_crossing(self, capsys):
        code, _ = run_cli(capsys, "derive", "--builtin", "cubic", "--point", "1e-7,0", "--j", "1", "--validate")
        assert code == 3

    def test_dproj_needs_direction(self, capsys):
        assert main(["derive", "--builtin", "cubic", "--point", "1,0", "--j", "2", "--dproj"]) == 1
        capsys.readouterr()


class TestExpand:
    def test_quartic_displacement(self, capsys):
        code, rep = run_cli(capsys, "expand", "--builtin", "quartic", "--point", "1,0", "--j", "2", "--y", "0.1,0.1")
        d = rep["outputs"]["displacement"]
        assert code == 0
        assert d["predicted"] == pytest.approx(1.22, abs=1e-14)
        assert d["actual"] == pytest.approx(1.22, abs=1e-14)
        assert d["residual"] <= 1e-14

    def test_constant_field(self, capsys, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"n": 1, "m": 2, "entries": [[[{"c": 1.0, "e": [0]}], []], [[], [{"c": 2.0, "e": [0]}]]]}))
        code, rep = run_cli(capsys, "expand", "--spec", str(path), "--point", "0", "--j", "1", "--y", "5")
        assert code == 0
        assert rep["outputs"]["displacement"]["predicted"] == rep["outputs"]["base"] == 1.0

    def test_cubic_order(self, capsys):
        code, rep = run_cli(capsys, "expand", "--builtin", "cubic", "--point", "1,0", "--j", "2",
                            "--e", "0,1", "--steps", "1e-1,3e-2,1e-2,3e-3,1e-3")
        assert code == 0
        assert rep["outputs"]["order_fit"]["fitted_order"] == pytest.approx(4.0, abs=0.1)

    def test_crossing(self, capsys):
        code, _ = run_cli(capsys, "expand", "--builtin", "cubic", "--point", "0,0", "--j", "1")
        assert code == 2


class TestScan:
    def test_cubic_refuted(self, capsys):
        code, rep = run_cli(capsys, "scan", "--builtin", "cubic", "--box=-1,1,-1,1", "--grid", "21", "--j", "1")
        assert code == 2
        assert rep["outputs"]["verdict"] == "refuted"
        assert np.linalg.norm(rep["outputs"]["witness"]) <= 0.1

    def test_quartic_supported(self, capsys):
        code, rep = run_cli(capsys, "scan", "--builtin", "quartic", "--box=0.5,1.5,-0.5,0.5", "--j", "2")
        assert code == 0
        assert rep["outputs"]["verdict"] == "supported"
        assert rep["outputs"]["scan"]["min_gap"] >= 0.5 - 1e-12

    def test_single_point_inconclusive(self, capsys):
        code, rep = run_cli(capsys, "scan", "--builtin", "quartic", "--box", "1,1,0,0", "--j", "1")
        assert code == 3
        assert rep["outputs"]["verdict"] == "inconclusive"

    def test_bad_box(self, capsys):
        assert main(["scan", "--builtin", "cubic", "--box", "1,0,0,1", "--j", "1"]) == 1
        capsys.readouterr()


class TestKyFan:
    def test_matrix(self, capsys):
        code, rep = run_cli(capsys, "kyfan", "--matrix", "3,0,0;0,1,0;0,0,2", "--k", "2",
                            "--samples", "20000", "--seed", "1")
        assert code == 0
        assert rep["outputs"]["value"] == 3.0
        np.testing.assert_allclose(rep["outputs"]["minimizer"], np.diag([0, 1.0, 1.0]), atol=1e-15)
        assert rep["outputs"]["bruteforce"]["excess"] >= 0

    def test_field_point(self, capsys):
        code, rep = run_cli(capsys, "kyfan", "--builtin", "cubic", "--point", "1,0", "--k", "1")
        assert code == 0
        assert rep["outputs"]["value"] == -1.0
        assert rep["outputs"]["minimizer"] == [[0.0, 0.0], [0.0, 1.0]]

    def test_k_zero_and_out_of_range(self, capsys):
        code, rep = run_cli(capsys, "kyfan", "--matrix", "1,0;0,2", "--k", "0")
        assert code == 0 and rep["outputs"]["value"] == 0.0
        assert rep["outputs"]["minimizer"] == [[0.0, 0.0], [0.0, 0.0]]
        assert main(["kyfan", "--matrix", "1,0;0,2", "--k", "3"]) == 1
        capsys.readouterr()

    def test_non_unique_minimizer(self, capsys):
        code, rep = run_cli(capsys, "kyfan", "--matrix", "1,0;0,1", "--k", "1")
        assert rep["outputs"]["minimizer"] is None and not rep["outputs"]["unique_minimizer"]


def test_gap_tolerance_env(capsys, monkeypatch):
    argv = ["eval", "--builtin", "cubic", "--point", "1e-9,0"]
    _, rep = run_cli(capsys, *argv)
    assert rep["outputs"]["decomposition"]["s"] == 1
    monkeypatch.setenv("SPECTRALFIELD_GAP_TOL", "1e-12")
    _, rep = run_cli(capsys, *argv)
    assert rep["outputs"]["decomposition"]["s"] == 2
    monkeypatch.setenv("SPECTRALFIELD_GAP_TOL", "-1")
    assert main(argv) == 1
    capsys.readouterr()


def test_out_file(capsys, tmp_path):
    path = tmp_path / "report.json"
    assert main(["eval", "--builtin", "cubic", "--point", "1,0", "--out", str(path)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(path.read_text())["command"] == "eval"


def test_byte_identical_reports(tmp_path):
    argv = ["spectralfield", "kyfan", "--matrix", "2,1;1,3", "--k", "1", "--samples", "3000", "--seed", "4"]
    runs = [
        subprocess.run([sys.executable, "-m", "spectralfield.cli", *argv[1:]], capture_output=True, check=True).stdout
        for _ in range(2)
    ]
    assert runs[0] == runs[1]
    assert b"%" not in runs[0]


def test_float_format():
    text = dumps_report({"b": 0.1, "a": [np.inf, 1, True]})
    assert text == '{"a": [null, 1, true], "b": 0.10000000000000001}\n'
