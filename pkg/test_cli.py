#!/usr/bin/env python3
"""
Tests for the command-line entry point: outputs and exit codes
"""
import sys
import os
import json
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest

from main import main
from src.dataset import ingest
from src.report import read_layout

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")


def _fixture(name):
    return os.path.join(FIXTURES, name)


@pytest.fixture(autouse=True)
def log_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("RVINE_LOG_DIR", str(tmp_path / "logs"))


def test_simulate_is_deterministic(tmp_path):
    first = str(tmp_path / "a.csv")
    second = str(tmp_path / "b.csv")
    args = ["--simulate", "--spec", _fixture("mixed_4d.spec"), "--n", "50", "--seed", "9"]
    assert main(args + ["--out", first]) == 0
    assert main(args + ["--out", second]) == 0
    with open(first, encoding="utf-8") as f:
        text = f.read()
    with open(second, encoding="utf-8") as f:
        assert f.read() == text
    data = ingest(first)
    assert data.values.shape == (50, 4)
    assert data.labels == ["X1", "X2", "X3", "X4"]
    print("✓ --simulate writes identical files for a fixed seed")


def test_fit_writes_outputs(tmp_path):
    data = str(tmp_path / "sim.csv")
    assert main(["--simulate", "--spec", _fixture("gauss_3d.spec"), "--n", "300", "--out", data]) == 0
    out = str(tmp_path / "fit")
    assert main(["--fit", "--spec", _fixture("gauss_3d.spec"), "--data", data, "--out", out]) == 0
    with open(os.path.join(out, "summary.json"), encoding="utf-8") as f:
        summary = json.load(f)
    assert summary["converged"] is True
    se = read_layout(os.path.join(out, "se.txt"))
    assert se.shape == (3, 3) and np.isfinite(se[2, 1])
    assert os.path.exists(os.path.join(out, "fitted.spec"))
    print("✓ --fit writes spec, table, SE layout and summary")


def test_fit_independence_spec(tmp_path):
    data = str(tmp_path / "u.csv")
    with open(data, "w", encoding="utf-8") as f:
        f.write("a,b\n0.1,0.9\n0.4,0.3\n0.7,0.6\n")
    out = str(tmp_path / "fit")
    assert main(["--fit", "--spec", _fixture("independence_2d.spec"), "--data", data, "--out", out]) == 0
    with open(os.path.join(out, "summary.json"), encoding="utf-8") as f:
        assert json.load(f)["loglik"] == 0.0


def test_fisher_on_independent_normal_pair(tmp_path):
    out = str(tmp_path / "fisher")
    assert main(["--fisher", "--spec", _fixture("pair_gauss_rho0.spec"), "--out", out]) == 0
    info = read_layout(os.path.join(out, "information.txt"))
    assert info[0, 0] == pytest.approx(1.0, abs=1e-3)
    print("✓ --fisher writes the information matrix")


def test_check_passes(tmp_path):
    data = str(tmp_path / "sim.csv")
    assert main(["--simulate", "--spec", _fixture("mixed_4d.spec"), "--n", "100", "--out", data]) == 0
    code = main(["--check", "--spec", _fixture("mixed_4d.spec"), "--data", data, "--what", "gradient"])
    assert code == 0


def test_exit_codes(tmp_path, capsys):
    bad = str(tmp_path / "bad.spec")
    with open(bad, "w", encoding="utf-8") as f:
        f.write("STRUCTURE\n3\n1 2\n2 1\nFAMILY\n1\n1 1\n")
    assert main(["--simulate", "--spec", bad, "--out", str(tmp_path / "x.csv")]) == 2
    assert "Error:" in capsys.readouterr().err

    # fitting needs data
    assert main(["--fit", "--spec", _fixture("gauss_3d.spec")]) == 2

    # above four dimensions only Monte Carlo is available
    code = main(["--fisher", "--spec", _fixture("exchange_rates.spec"), "--out", str(tmp_path / "f")])
    assert code == 5

    data = str(tmp_path / "short.csv")
    with open(data, "w", encoding="utf-8") as f:
        f.write("a,b\n0.1,0.9\n0.4,0.3\n")
    code = main(["--rolling", "--spec", _fixture("pair_gauss_rho0.spec"), "--data", data, "--window", "10"])
    assert code == 4
    print("✓ exit codes follow the error category")


if __name__ == "__main__":
    print("Run with: pytest test_cli.py")
