from __future__ import annotations

import json
import subprocess
import sys

import pytest

from orderk.cli import main

from conftest import TRIANGLE


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def value(line: str) -> float:
    return float(line.rsplit(":", 1)[1])


@pytest.fixture
def tri_csv(tmp_path):
    f = tmp_path / "tri.csv"
    f.write_text("x,y\n" + "\n".join(f"{float(x)!r},{float(y)!r}" for x, y in TRIANGLE) + "\n")
    return f


class TestExpect:
    @pytest.mark.parametrize("argv,expected", [
        (("--n", "2", "--k", "1", "--ell", "0", "--rho", "1"), 2.0),
        (("--n", "3", "--k", "5", "--ell", "3", "--rho", "7"), 1.0),
        (("--n", "2", "--k", "2", "--ell", "0", "--rho", "1"), 6.0),
        (("--n", "2", "--k", "1", "--j", "0", "--rho", "3"), 3.0),
    ])
    def test_values(self, capsys, argv, expected):
        code, out, _ = run(capsys, "expect", *argv)
        assert code == 0 and value(out) == pytest.approx(expected, abs=1e-9)

    def test_twelve_digits(self, capsys):
        _, out, _ = run(capsys, "expect", "--n", "3", "--k", "1", "--ell", "0")
        assert out.strip().endswith("6.76772873218")

    def test_missing_constants(self, capsys):
        code, _, err = run(capsys, "expect", "--n", "2", "--k", "2", "--j", "1")
        assert code == 3 and "C" in err

    def test_with_ctable(self, capsys, tmp_path):
        f = tmp_path / "c.json"
        f.write_text(json.dumps({"n": 2, "entries": [
            {"v": 1, "u": 1, "C": 2.0}, {"v": 1, "u": 2, "C": 1.0}, {"v": 2, "u": 2, "C": 1.0}]}))
        code, out, _ = run(capsys, "expect", "--n", "2", "--k", "2", "--j", "2", "--ctable", str(f))
        assert code == 0 and value(out) == pytest.approx(6.0)

    def test_domain_error(self, capsys):
        code, _, _ = run(capsys, "expect", "--n", "2", "--k", "1", "--ell", "5")
        assert code == 2

    def test_usage_errors(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["expect", "--n", "2", "--k", "1"])
        assert exc.value.code == 2
        with pytest.raises(SystemExit) as exc:
            main(["expect", "--n", "2", "--k", "1", "--ell", "0", "--bogus"])
        assert exc.value.code == 2


class TestMosaic:
    def test_triangle(self, capsys, tri_csv, tmp_path):
        out_file = tmp_path / "m.json"
        code, out, _ = run(capsys, "mosaic", "--input", str(tri_csv), "--k", "2", "--out", str(out_file))
        assert code == 0 and "4 intervals, 7 cells" in out
        data = json.loads(out_file.read_text())
        assert len(data["intervals"]) == 4 and len(data["cells"]) == 7
        assert data["config"]["k"] == 2 and "version" in data

    def test_degenerate_input_and_jitter(self, capsys, tmp_path):
        f = tmp_path / "sq.csv"
        f.write_text("0,0\n1,0\n1,1\n0,1\n")
        code, _, err = run(capsys, "mosaic", "--input", str(f), "--k", "1")
        assert code == 2 and "tuple" in err
        code, out, _ = run(capsys, "mosaic", "--input", str(f), "--k", "1", "--jitter", "1e-6", "--seed", "3")
        assert code == 0 and "by dimension [4, 5, 2]" in out

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "mosaic", "--input", str(tmp_path / "nope.csv"), "--k", "1")
        assert code == 2

    def test_bias_exit(self, capsys, tmp_path):
        import numpy as np

        pts = np.random.default_rng(0).uniform(0, 12, (144, 2))
        f = tmp_path / "p.csv"
        f.write_text("\n".join(f"{x},{y}" for x, y in pts))
        code, out, _ = run(capsys, "mosaic", "--input", str(f), "--k", "2", "--box", "12", "--r-max", "0.8")
        assert code == 4 and "BIAS" in out


class TestExperiments:
    ARGS = ("--k", "1", "2", "--L", "10", "--reps", "2", "--seed", "5")

    def test_simulate_is_deterministic(self, capsys, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run(capsys, "simulate", *self.ARGS, "--out", str(a))[0] == 0
        assert run(capsys, "simulate", *self.ARGS, "--out", str(b), "--csv", str(tmp_path / "b.csv"))[0] == 0
        assert a.read_bytes() == b.read_bytes()
        data = json.loads(a.read_text())
        assert data["config"]["seed"] == 5 and data["config"]["orders"] == [1, 2] and data["version"]
        assert (tmp_path / "b.csv").read_text().startswith("name,mean,stderr,theory,z")

    def test_compare_lines(self, capsys):
        code, out, _ = run(capsys, "compare", *self.ARGS)
        assert code == 0
        lines = [l for l in out.splitlines() if l.startswith("area_")]
        assert len(lines) == 4 and all(("PASS" in l) or ("FAIL" in l) for l in lines)

    def test_constants_then_compare(self, capsys, tmp_path):
        c = tmp_path / "c.json"
        code, out, _ = run(capsys, "constants", "--L", "10", "--reps", "2", "--seed", "1", "--out", str(c))
        assert code == 0 and "C[v=2, u=2, n=2]" in out
        data = json.loads(c.read_text())
        assert data["n"] == 2 and len(data["entries"]) == 3 and data["config"]["seed"] == 1
        code, out, _ = run(capsys, "compare", *self.ARGS, "--ctable", str(c))
        assert "intervals_v1u2g2_k2" in out and "cells_j1_k2" in out


def test_entry_point_module():
    out = subprocess.run([sys.executable, "-m", "orderk", "expect", "--n", "2", "--k", "2", "--ell", "0"],
                         capture_output=True, text=True, check=True)
    assert value(out.stdout) == pytest.approx(6.0)
    version = subprocess.run([sys.executable, "-m", "orderk", "--version"], capture_output=True, text=True)
    assert version.stdout.startswith("orderk 0.1.0")
