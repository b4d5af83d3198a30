import json

import pytest

import cokernel_lab.diagnostics as diagnostics
from cokernel_lab.cli import build_parser, main
from cokernel_lab.diagnostics import CheckResult
from cokernel_lab.errors import OutOfRange


def test_parser_rejects_bad_flags_without_exiting():
    parser = build_parser()
    with pytest.raises(OutOfRange):
        parser.parse_args(["census"])  # missing required --n
    with pytest.raises(OutOfRange):
        parser.parse_args(["no-such-command"])


def test_census_cli(tmp_path, capsys):
    code = main(
        ["census", "--n", "8", "--replicas", "4", "--seed", "3", "--out", str(tmp_path)]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "census:" in out and "TV(empirical, reference)" in out
    lines = (tmp_path / "records.jsonl").read_text().splitlines()
    assert len(lines) == 4
    json.loads(lines[0])
    assert (tmp_path / "report.csv").exists()
    assert (tmp_path / "report.png").exists()


def test_census_cli_bad_prime_exits_4(capsys):
    assert main(["census", "--n", "8", "--replicas", "2", "--primes", "3"]) == 4
    assert "invalid configuration" in capsys.readouterr().err


def test_hypertree_census_cli(tmp_path, capsys):
    code = main(
        [
            "hypertree-census",
            "--n",
            "4",
            "--replicas",
            "3",
            "--primes",
            "2,3",
            "--out",
            str(tmp_path),
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "hypertree-census:" in out
    assert "p = 2 census" in out


def test_moment_scan_cli(tmp_path, capsys):
    code = main(
        ["moment-scan", "--n", "6,8", "--group", "2", "--out", str(tmp_path)]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "moment-scan:" in out and "n=6" in out and "n=8" in out
    assert (tmp_path / "scan.csv").exists()
    assert (tmp_path / "scan.png").exists()


def test_moment_scan_cli_budget_exit_3(capsys):
    code = main(["moment-scan", "--n", "400", "--group", "5", "--budget", "1000"])
    assert code == 3


def test_moment_scan_cli_bad_group_exit_4(capsys):
    assert main(["moment-scan", "--n", "6", "--group", "0"]) == 4
    assert main(["moment-scan", "--n", "6", "--group", "2,x"]) == 4


def test_diagnostics_cli_subset(capsys):
    code = main(["diagnostics", "--suites", "exact-det,snf", "--budget", "40"])
    assert code == 0
    out = capsys.readouterr().out
    assert "[ok]" in out and "[FAIL]" not in out


def test_diagnostics_cli_unknown_suite(capsys):
    assert main(["diagnostics", "--suites", "nope"]) == 4


def test_diagnostics_cli_failure_exits_2(monkeypatch, capsys):
    def failing(seed, trials):
        return [CheckResult("fake", "always fails", False, "forced")]

    monkeypatch.setitem(diagnostics.SUITES, "fake", failing)
    code = main(["diagnostics", "--suites", "fake"])
    assert code == 2
    out = capsys.readouterr().out
    assert "[FAIL]" in out


def test_kalai_cli(capsys):
    assert main(["kalai-check", "--n", "4"]) == 0
    out = capsys.readouterr().out
    assert "identity holds" in out


def test_kalai_cli_budget_exit_3(capsys):
    assert main(["kalai-check", "--n", "7"]) == 3


def test_divergence_check_cli(capsys):
    code = main(["divergence-check", "--replicas", "300", "--seed", "1"])
    assert code == 0
    out = capsys.readouterr().out
    assert "[ok]" in out


def test_laplace_check_cli(capsys):
    code = main(["laplace-check", "--budget", "40", "--n", "4000"])
    assert code == 0
    out = capsys.readouterr().out
    assert "lattice sum" in out
    assert "cubic remainder" in out
