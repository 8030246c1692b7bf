import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from dqlyap.cli import field_to_csv, main
from dqlyap.dq import GridSpec
from dqlyap.problems import PoissonSpec, manufactured_poisson, solve_poisson


def write_config(tmp_path, doc, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run(argv):
    out = io.StringIO()
    code = main(argv, stdout=out)
    return code, out.getvalue()


def read_field(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


class TestSolve:
    def test_zero_poisson(self, tmp_path):
        cfg = write_config(tmp_path, {"problem": "poisson", "grid": {"n": 7}})
        code, text = run(["solve", "--config", cfg, "--out", str(tmp_path / "f.csv")])
        assert code == 0 and text == ""
        header, data = read_field((tmp_path / "f.csv").read_text())
        assert header == ["x", "y", "value"]
        assert data.shape == (49, 3)
        assert not data[:, 2].any()
        report = json.loads((tmp_path / "f.json").read_text())
        assert report["relative_residual"] == 0.0
        assert report["method"] == "centro-split"

    def test_stdout_and_stderr(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"problem": "poisson", "grid": {"n": 5}, "source": {"constant": 1.0}})
        code, text = run(["solve", "--config", cfg])
        assert code == 0
        assert text.startswith("x,y,value\n")
        assert json.loads(capsys.readouterr().err)["problem"] == "poisson"

    def test_manufactured_max_error(self, tmp_path):
        cfg = write_config(tmp_path, {"problem": "poisson", "grid": {"n": 11}, "source": "manufactured-sin"})
        assert run(["solve", "--config", cfg, "--out", str(tmp_path / "f.csv")])[0] == 0
        assert json.loads((tmp_path / "f.json").read_text())["max_error"] < 1e-4

    def test_compare(self, tmp_path):
        cfg = write_config(tmp_path, {
            "problem": "convdiff", "grid": {"n": 9}, "alpha": 0.8, "source": {"constant": 2.0},
            "bc": {"x": {"left": {"kind": "dirichlet", "value": 1.0},
                         "right": {"kind": "neumann", "value": 0.0}}},
        })
        out = tmp_path / "f.csv"
        code, _ = run(["solve", "--config", cfg, "--method", "bartels-stewart", "--compare", "--out", str(out)])
        assert code == 0
        report = json.loads((tmp_path / "f.json").read_text())
        assert report["compare"]["method"] == "kronecker-gauss"
        assert report["compare"]["agree"] and report["compare"]["max_abs_diff"] <= 1e-9

    def test_golden_matches_library(self, tmp_path):
        cfg = write_config(tmp_path, {"problem": "poisson", "grid": {"n": 9}, "beta": 1.5,
                                      "source": "manufactured-sin", "method": "hessenberg-schur"})
        _, text = run(["solve", "--config", cfg, "--out", str(tmp_path / "f.csv")])
        spec = PoissonSpec(GridSpec.regular(9), 1.5, manufactured_poisson(1.5)[1])
        sol = solve_poisson(spec, "hessenberg-schur")
        expected = field_to_csv(sol.field, [ax.points for ax in spec.grid.axes])
        assert (tmp_path / "f.csv").read_text() == expected
        _, data = read_field(expected)
        assert np.array_equal(data[:, 2], sol.field.ravel())

    def test_three_d_header(self, tmp_path):
        cfg = write_config(tmp_path, {"problem": "convdiff3d", "grid": {"n": 5},
                                      "bc": {"y": {"left": {"value": 1.0}}}})
        code, text = run(["solve", "--config", cfg])
        assert code == 0
        header, data = read_field(text)
        assert header == ["x", "y", "z", "value"] and data.shape == (125, 4)

    def test_transient(self, tmp_path):
        cfg = write_config(tmp_path, {"problem": "transient", "grid": {"n": 7},
                                      "transient": {"dt": 0.1, "steps": 3}})
        code, text = run(["solve", "--config", cfg])
        assert code == 0 and text.startswith("x,y,value")

    @pytest.mark.parametrize("doc", [
        {"problem": "poisson", "colour": "red"},
        {"problem": "heat"},
        {"problem": "poisson", "grid": {"n": 2}},
        {"problem": "poisson", "beta": -1.0},
        {"problem": "convdiff", "alpha": 0.0},
        {"problem": "transient"},
        {"problem": "poisson", "bc": {"x": {"left": {"kind": "neumann"}, "right": {"kind": "neumann"}}}},
        {"problem": "poisson", "bc": {"z": {}}},
    ])
    def test_bad_config(self, tmp_path, doc):
        assert run(["solve", "--config", write_config(tmp_path, doc)])[0] == 2

    def test_unreadable_config(self, tmp_path):
        assert run(["solve", "--config", str(tmp_path / "missing.json")])[0] == 2
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run(["solve", "--config", str(bad)])[0] == 2

    def test_solver_failure_names_contract(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"problem": "convdiff3d", "grid": {"n": 19}})
        assert run(["solve", "--config", cfg])[0] == 3
        assert "pde_problems" in capsys.readouterr().err


class TestBench:
    def test_ratio_table(self, tmp_path):
        code, text = run(["bench", "--sizes", "7,11", "--table", "ratios", "--out", str(tmp_path / "b")])
        assert code == 0
        lines = text.splitlines()
        assert "34.9%" in lines[1] and "5.9%" in lines[2]
        doc = json.loads((tmp_path / "b.json").read_text())
        assert len(doc["records"]) == 4
        assert (tmp_path / "b.csv").read_text().startswith("case_id,")

    @pytest.mark.parametrize("sizes", ["", ",", "abc", "3"])
    def test_bad_sizes(self, sizes):
        assert run(["bench", "--sizes", sizes])[0] == 2

    def test_bad_method(self):
        assert run(["bench", "--sizes", "7", "--methods", "magic"])[0] == 2

    def test_deterministic_csv(self, tmp_path):
        argv = ["bench", "--sizes", "5,7", "--methods", "bartels-stewart,centro-split"]
        a = run(argv + ["--out", str(tmp_path / "a")])
        b = run(argv + ["--out", str(tmp_path / "b")])
        assert a == b
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_failed_row_exits_3(self):
        code, text = run(["bench", "--sizes", "5,19", "--problem", "convdiff3d",
                          "--methods", "bartels-stewart"])
        assert code == 3
        assert "SizeError" in text


class TestConvergence:
    def test_decreasing(self):
        code, text = run(["convergence", "--sizes", "7,9,11,13"])
        assert code == 0
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[0] == ["n_points", "max_error"]
        errors = [float(r[1]) for r in rows[1:]]
        assert [int(r[0]) for r in rows[1:]] == [7, 9, 11, 13]
        assert all(b < a for a, b in zip(errors, errors[1:]))

    def test_single_row(self, tmp_path):
        out = tmp_path / "c.csv"
        assert run(["convergence", "--sizes", "9", "--problem", "convdiff", "--out", str(out)])[0] == 0
        assert len(out.read_text().splitlines()) == 2

    def test_non_manufactured_source(self, tmp_path):
        cfg = write_config(tmp_path, {"problem": "poisson", "source": {"constant": 1.0}})
        assert run(["convergence", "--sizes", "7,9", "--config", cfg])[0] == 2

    def test_inhomogeneous_faces(self, tmp_path):
        cfg = write_config(tmp_path, {"problem": "poisson", "source": "manufactured-sin",
                                      "bc": {"x": {"left": {"value": 1.0}}}})
        assert run(["convergence", "--sizes", "7", "--config", cfg])[0] == 2
        code, _ = run(["solve", "--config", cfg, "--out", str(tmp_path / "f.csv")])
        assert code == 0 and "max_error" not in json.loads((tmp_path / "f.json").read_text())

    def test_problem_without_exact_solution(self, tmp_path):
        cfg = write_config(tmp_path, {"problem": "convdiff3d"})
        assert run(["convergence", "--sizes", "7", "--config", cfg])[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dqlyap", "bench", "--sizes", "7", "--table", "ratios"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert "34.9%" in proc.stdout


def test_missing_command():
    assert run([])[0] == 2
