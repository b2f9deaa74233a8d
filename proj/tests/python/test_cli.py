import csv
import os
import subprocess

import pytest

CLI = os.environ.get("H2SE_CLI")
pytestmark = pytest.mark.skipif(not CLI, reason="H2SE_CLI not set")


def run(*args, cwd=None):
    return subprocess.run([CLI, *args], cwd=cwd, capture_output=True, text=True)


def test_generate(tmp_path):
    out = tmp_path / "m.txt"
    r = run("generate", "--n", "1", "-o", str(out))
    assert r.returncode == 0
    lines = out.read_text().split("\n")
    assert lines[0] == "4 2"


def test_inspect():
    r = run("inspect", "--n", "4")
    assert r.returncode == 0
    assert "N 32" in r.stdout
    assert "holds" in r.stdout


def test_solve_zero_rhs(tmp_path):
    r = run("solve", "--n", "6", "--rhs", "zero", "--method", "se_ilut", "--output-dir", str(tmp_path))
    assert r.returncode == 0
    solution = (tmp_path / "solution.txt").read_text().split()
    assert len(solution) == 72 and all(float(v) == 0.0 for v in solution)
    with open(tmp_path / "summary.csv") as f:
        row = next(csv.DictReader(f))
    assert row["status"] == "ok" and row["iterations"] == "0"


def test_empty_benchmark(tmp_path):
    r = run("benchmark", "--output-dir", str(tmp_path))
    assert r.returncode == 0
    assert len((tmp_path / "benchmark.csv").read_text().splitlines()) == 1
    assert len((tmp_path / "histories.csv").read_text().splitlines()) == 1


def test_exit_codes(tmp_path):
    assert run("solve", "--n", "abc").returncode == 1
    assert run("frobnicate").returncode == 1
    refused = run("solve", "--n", "20", "--dense-cap", "100", "--output-dir", str(tmp_path))
    assert refused.returncode == 2
