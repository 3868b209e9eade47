import json
import subprocess
import sys

import pytest

from bdssd.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_validate_and_eigen(capsys):
    code, out, _ = run(["validate", "e2"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["status"] == "ok"
    assert rep["results"]["report"]["strictly_monotone"]
    code, out, _ = run(["eigen", "cex", "--format", "csv"], capsys)
    lines = out.strip().splitlines()
    assert lines[0] == "index,eigenvalue"
    assert float(lines[1].split(",")[1]) == pytest.approx(-0.2900909015790026, abs=1e-15)


def test_dual_subcommands(capsys):
    code, out, _ = run(["dual", "classical", "e2"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["results"]["dual"]["death"][0] == "1/12"
    code, out, _ = run(["dual", "anti", "cex"], capsys)
    assert json.loads(out)["results"]["H"] == ["7/9", "7/8", 1]
    code, out, _ = run(["dual", "spectral", "e2c"], capsys)
    assert code == 0


def test_absorb_outputs(capsys):
    code, out, _ = run(["absorb", "d1", "--pgf", "0.5"], capsys)
    assert code == 0
    assert json.loads(out)["results"]["pgf"] == pytest.approx(0.75 * 0.5 / (1 - 0.25 * 0.5), abs=1e-12)
    code, out, _ = run(["absorb", "e2c-absorbing", "--occupation", "1,1"], capsys)
    assert json.loads(out)["results"]["laplace"] == pytest.approx(0.4, abs=1e-14)
    code, out, _ = run(["absorb", "e2c-absorbing", "--cdf", "--times", "0:2:5", "--format", "csv"], capsys)
    assert code == 0 and len(out.strip().splitlines()) == 6


def test_verify_profiles(capsys):
    for chain in ("e2", "cex", "e2c", "e2c-absorbing", "d1"):
        code, out, _ = run(["verify", chain], capsys)
        rep = json.loads(out)
        assert code == 0, rep
        for check in rep["results"]["checks"]:
            if check["status"] == "skipped":
                assert check["reason"]
    code, out, _ = run(["verify", "cex"], capsys)
    skipped = [c for c in json.loads(out)["results"]["checks"] if c["status"] == "skipped"]
    assert any("negative eigenvalue" in c["reason"] for c in skipped)
    code, out, _ = run(["verify", "e2c", "--profile", "full", "--replicas", "100000", "--seed", "1"], capsys)
    assert code == 0


def test_simulate_reproducible(capsys, tmp_path):
    argv = ["simulate", "e2", "--replicas", "2000", "--seed", "5"]
    _, a, _ = run(argv, capsys)
    _, b, _ = run(argv, capsys)
    assert a == b
    csv_path = tmp_path / "paths.csv"
    code, _, _ = run(argv + ["--trajectory-csv", str(csv_path), "--trajectories", "3"], capsys)
    assert code == 0 and csv_path.read_text().startswith("replica")


def test_exit_codes(capsys, tmp_path):
    assert run(["simulate", "e2", "--replicas", "10"], capsys)[0] == 2
    assert run(["validate", "--bogus", "e2"], capsys)[0] == 2
    assert run(["validate", str(tmp_path / "missing.json")], capsys)[0] == 3
    bad = tmp_path / "bad.json"
    bad.write_text('{"type": "discrete", "d": 2, "birth": [0.5], "death": [0.1, 0.1]}')
    assert run(["validate", str(bad)], capsys)[0] == 3
    code, out, err = run(["absorb", "e2"], capsys)
    assert code == 4 and json.loads(out)["status"] == "error" and err


def test_output_file_and_env(tmp_path, monkeypatch, capsys):
    out = tmp_path / "r.json"
    monkeypatch.setenv("BD_NUMERIC_MODE", "float")
    assert main(["validate", "e2", "-o", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["results"]["chain"]["birth"][0] == 0.5
    capsys.readouterr()


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "bdssd.cli", "eigen", "e2c"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["results"]["eigenvalues"] == pytest.approx([0, 2, 4])
