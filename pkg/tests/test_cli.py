import json
from pathlib import Path

import pytest

from ramcf.cli import main


def write_scenario(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def test_eval_constant_diverges(tmp_path, capsys):
    rc = main(["--out-dir", str(tmp_path), "eval", "--constant", "1",
               "--max-n", "600", "--windows", "3"])
    assert rc == 0
    assert "diverged-periodic" in capsys.readouterr().out
    assert (tmp_path / "report.json").exists()
    assert (tmp_path / "trace.csv").exists()


def test_eval_constant_converges(tmp_path):
    rc = main(["--out-dir", str(tmp_path), "eval", "--constant", "0.2",
               "--max-n", "600", "--windows", "3"])
    assert rc == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["report"]["verdict"] == "converged"
    assert report["report"]["limit_estimate"].startswith("-0.2763932022500210")


def test_eval_quasiperiodic_undecided(tmp_path):
    # constant with (nearly) golden rotation number: no finite period
    a = "1.9038109282003002081603920572496696565296471402"
    rc = main(["--out-dir", str(tmp_path), "eval", "--constant", a,
               "--max-n", "600", "--windows", "3"])
    assert rc == 2


def test_eval_nonpositive_errors(tmp_path):
    rc = main(["--out-dir", str(tmp_path), "eval", "--constant", "0"])
    assert rc == 1


def test_usage_error_is_64(tmp_path):
    assert main(["eval"]) == 64
    assert main(["--bogus"]) == 64
    assert main(["eval", "--constant", "1", "--explicit", "x"]) == 64


def test_help_exits_zero():
    assert main(["--help"]) == 0


def test_rho_values(capsys):
    from mpmath import mpf

    assert main(["rho", "--a", "1"]) == 0
    out = capsys.readouterr().out.strip()
    assert out.startswith("0.3333333333333333333333333333333")
    assert main(["rho", "--inverse", "0.25"]) == 0
    out = capsys.readouterr().out.strip()
    assert abs(mpf(out) - mpf("0.5")) < mpf("1e-70")


def test_rho_domain_error():
    assert main(["rho", "--a", "0.25"]) == 1
    assert main(["rho", "--inverse", "0.5"]) == 1


def test_classify_output(capsys):
    assert main(["classify", "--b", "0.2"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["kind"] == "hyperbolic"
    assert data["attractor"].startswith("-0.27639")
    assert main(["classify", "--b", "1"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["kind"] == "elliptic"
    assert data["rotation_number"].startswith("0.3333")


def test_construct_rational_pass(tmp_path):
    scenario = write_scenario(
        tmp_path / "sc.json",
        {"mode": "rational", "p": 1, "q": 3, "max_n": 3000},
    )
    rc = main(["--out-dir", str(tmp_path / "out"), "construct", "--scenario", scenario])
    assert rc == 0
    artifact = json.loads((tmp_path / "out" / "report.json").read_text())
    assert artifact["certificate"]["passed"] is True


def test_construct_geometric_rule_fails_certificate(tmp_path, mp256):
    from mpmath import mpf, nstr

    r_values = [nstr(mpf(2) ** -r, 12) for r in range(120)]
    scenario = write_scenario(
        tmp_path / "sc.json",
        {
            "mode": "rational",
            "p": 1,
            "q": 3,
            "t_rule": "custom",
            "r_values": r_values,
            "max_n": 360,
            "num_stages": 40,
            "windows": 3,
        },
    )
    rc = main(["--out-dir", str(tmp_path / "out"), "construct", "--scenario", scenario])
    assert rc == 3
    assert (tmp_path / "out" / "diagnostic.json").exists()


def test_construct_mode_mismatch(tmp_path):
    scenario = write_scenario(
        tmp_path / "sc.json", {"mode": "rational", "p": 1, "q": 3}
    )
    rc = main(["construct", "--scenario", scenario, "--mode", "irrational"])
    assert rc == 1


def test_construct_irrational_pass(tmp_path):
    scenario = write_scenario(
        tmp_path / "sc.json",
        {
            "mode": "irrational",
            "rho": {"form": "quadratic", "p": 3, "q": 2, "d": 5, "sign": -1},
            "stages": 1,
            "max_n": 4000,
        },
    )
    rc = main(["--out-dir", str(tmp_path / "out"), "construct", "--scenario", scenario])
    assert rc == 0


def test_gill_summable_divergent_fraction(tmp_path, capsys):
    rc = main(["--out-dir", str(tmp_path), "gill", "--a", "1", "--rule", "2^-i",
               "--max-n", "1600"])
    assert rc == 0
    payload = json.loads((tmp_path / "gill.json").read_text())
    assert payload["summable_heuristic"] is True
    assert payload["verdict"] == "diverged-periodic"


def test_gill_zero_rule_constant_case(tmp_path):
    rc = main(["--out-dir", str(tmp_path), "gill", "--a", "1", "--rule", "0",
               "--max-n", "1600"])
    assert rc == 0
    payload = json.loads((tmp_path / "gill.json").read_text())
    assert payload["final_sum"] == "0.0"
    assert payload["verdict"] == "diverged-periodic"


def test_gill_residues_mode_converges(tmp_path):
    rc = main(["--out-dir", str(tmp_path), "gill", "--a", "1", "--rule", "1/i",
               "--max-n", "3000", "--residues-mod", "3"])
    assert rc == 0
    payload = json.loads((tmp_path / "gill.json").read_text())
    assert payload["summable_heuristic"] is False
    assert payload["verdict"] == "converged"


def test_compare_cli(tmp_path, capsys):
    main(["--out-dir", str(tmp_path / "a"), "eval", "--constant", "1",
          "--max-n", "600", "--windows", "3"])
    main(["--out-dir", str(tmp_path / "b"), "eval", "--constant", "0.2",
          "--max-n", "600", "--windows", "3"])
    capsys.readouterr()
    rc = main(["--out-dir", str(tmp_path / "cmp"), "compare",
               str(tmp_path / "a" / "report.json"), str(tmp_path / "b" / "report.json")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "diverged-periodic" in out and "converged" in out
    assert (tmp_path / "cmp" / "comparison.csv").exists()


def test_batch(tmp_path):
    s1 = write_scenario(tmp_path / "one.json",
                        {"mode": "constant", "a": "1", "max_n": 600, "windows": 3})
    s2 = write_scenario(tmp_path / "two.json",
                        {"mode": "constant", "a": "0.2", "max_n": 600, "windows": 3})
    rc = main(["--out-dir", str(tmp_path / "runs"), "batch", s1, s2])
    assert rc == 0
    assert (tmp_path / "runs" / "one" / "report.json").exists()
    assert (tmp_path / "runs" / "two" / "report.json").exists()


def test_precision_env_and_flag(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("RAMCF_PRECISION_BITS", "128")
    assert main(["rho", "--a", "1"]) == 0
    out_env = capsys.readouterr().out.strip()
    assert len(out_env) < 50  # 128-bit output is shorter than 256-bit
    # flag wins over the environment
    assert main(["--precision-bits", "256", "rho", "--a", "1"]) == 0
    out_flag = capsys.readouterr().out.strip()
    assert len(out_flag) > len(out_env)


def test_precision_does_not_change_verdicts(tmp_path):
    for bits in ("128", "256", "512"):
        out = tmp_path / bits
        rc = main(["--precision-bits", bits, "--out-dir", str(out),
                   "eval", "--constant", "1", "--max-n", "600", "--windows", "3"])
        assert rc == 0
        report = json.loads((out / "report.json").read_text())
        assert report["report"]["verdict"] == "diverged-periodic"
        assert report["report"]["period"] == 3
