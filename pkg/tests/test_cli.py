"""Command line behavior: exit codes, artifacts, determinism."""

import json
import subprocess
import sys

import pytest

from ecpsim.cli import main

CSV_HEADER = "alpha,alpha_sq,eta,k,p_total_formula,p_total_sim,stderr"


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_run_prints_a_report(capsys):
    code, out, _ = run_cli(
        capsys, "run", "--alpha-sq", "0.6", "--gamma-sq", "0.5"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["protocol"] == "ecp1"
    assert payload["p_total"] == pytest.approx(0.72, abs=1e-12)
    assert payload["rounds"][0]["heralded_fidelity"] == pytest.approx(
        1.0, abs=1e-12
    )


def test_run_defaults_to_single_rail(capsys):
    code, out, _ = run_cli(
        capsys, "run", "--protocol", "ecp2", "--alpha-sq", "0.6", "--rounds", "2"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["gamma_sq"] is None
    assert payload["rounds"][0]["p_success"] == pytest.approx(0.48, abs=1e-12)


def test_run_writes_the_same_text_to_out(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, out, _ = run_cli(
        capsys, "run", "--alpha-sq", "0.6", "--out", str(target)
    )
    assert code == 0
    assert target.read_text(encoding="utf-8") == out


def test_run_monte_carlo_is_seed_deterministic(capsys):
    args = (
        "run", "--protocol", "ecp2", "--alpha-sq", "0.6", "--rounds", "3",
        "--engine", "monte_carlo", "--eta", "0.8", "--trials", "20000",
        "--seed", "42",
    )
    code1, out1, _ = run_cli(capsys, *args)
    code2, out2, _ = run_cli(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2
    _, out3, _ = run_cli(capsys, *args[:-1], "43")
    assert out3 != out1


def test_run_custom_circuit_file(tmp_path, capsys):
    from ecpsim.circuits import builtin_text

    path = tmp_path / "layout.ecp"
    path.write_text(builtin_text("ecp1_stripped"), encoding="utf-8")
    code, out, _ = run_cli(
        capsys, "run", "--circuit", str(path), "--alpha-sq", "0.6"
    )
    assert code == 0
    assert json.loads(out)["p_total"] == pytest.approx(0.48, abs=1e-12)


def test_malformed_circuit_exits_2(tmp_path, capsys):
    path = tmp_path / "broken.ecp"
    path.write_text("circuit oops\nnot a statement\n", encoding="utf-8")
    code, _, err = run_cli(
        capsys, "run", "--circuit", str(path), "--alpha-sq", "0.6"
    )
    assert code == 2
    assert "error:" in err


def test_bad_configuration_exits_3(capsys):
    code, _, err = run_cli(capsys, "run", "--alpha-sq", "0.6", "--eta", "1.5")
    assert code == 3
    assert "efficiency" in err
    code, _, _ = run_cli(
        capsys, "run", "--alpha-sq", "0.6", "--rounds", "2"
    )
    assert code == 3
    code, _, _ = run_cli(
        capsys, "run", "--engine", "monte_carlo", "--protocol", "ecp2"
    )
    assert code == 3


def test_bad_flag_exits_3():
    proc = subprocess.run(
        [sys.executable, "-m", "ecpsim.cli", "run", "--no-such-flag"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 3


def test_missing_circuit_file_exits_4(capsys):
    code, _, err = run_cli(
        capsys, "run", "--circuit", "/nonexistent/x.ecp", "--alpha-sq", "0.6"
    )
    assert code == 4
    assert "error:" in err


def test_sweep_header_and_rows(tmp_path, capsys):
    target = tmp_path / "sweep.csv"
    code, _, _ = run_cli(
        capsys,
        "sweep", "--alpha-sq-list", "0.3,0.5", "--rounds", "2",
        "--eta", "0.8", "--trials", "5000", "--seed", "1",
        "--out", str(target),
    )
    assert code == 0
    lines = target.read_text(encoding="utf-8").strip().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 3
    first = lines[1].split(",")
    assert float(first[1]) == pytest.approx(0.3)
    assert float(first[0]) == pytest.approx(0.3**0.5)
    assert int(first[3]) == 2
    for line in lines[1:]:
        fields = line.split(",")
        assert abs(float(fields[4]) - float(fields[5])) <= 5.0 * max(
            float(fields[6]), 1e-9
        )


def test_sweep_is_seed_deterministic(tmp_path, capsys):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    base = ("sweep", "--alpha-sq-list", "0.4,0.6", "--trials", "4000",
            "--seed", "9")
    assert run_cli(capsys, *base, "--out", str(a))[0] == 0
    assert run_cli(capsys, *base, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_env_seed_is_the_default(tmp_path, capsys, monkeypatch):
    args = (
        "run", "--protocol", "ecp2", "--alpha-sq", "0.6",
        "--engine", "monte_carlo", "--eta", "0.8", "--trials", "5000",
    )
    monkeypatch.setenv("ECPSIM_SEED", "21")
    _, via_env, _ = run_cli(capsys, *args)
    monkeypatch.delenv("ECPSIM_SEED")
    _, via_flag, _ = run_cli(capsys, *args, "--seed", "21")
    assert via_env == via_flag
    assert json.loads(via_env)["seed"] == 21
    monkeypatch.setenv("ECPSIM_SEED", "not-a-number")
    code, _, err = run_cli(capsys, *args)
    assert code == 3
    assert "ECPSIM_SEED" in err


def test_verify_passes_clean(capsys):
    code, out, _ = run_cli(capsys, "verify", "--trials", "5000")
    assert code == 0
    assert "PASS" in out
    assert "INFO" in out
    assert "0 failed" in out


def test_verify_catches_the_planted_fault(capsys):
    code, out, _ = run_cli(capsys, "verify", "--trials", "5000", "--inject")
    assert code == 1
    assert "FAIL" in out


def test_console_script_entry_point():
    proc = subprocess.run(
        ["ecpsim", "run", "--alpha-sq", "0.6"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["p_total"] == pytest.approx(0.48, abs=1e-12)
