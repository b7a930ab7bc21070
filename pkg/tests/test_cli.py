"""CLI behavior: subcommands, exit codes, report determinism."""

import json

import pytest

from algebroids import fixtures as fx
from algebroids.cli import main
from algebroids.modelfile import load


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_list_fixtures(capsys):
    code, out, _ = run(capsys, "list-fixtures")
    assert code == 0
    for name in fx.FIXTURE_NAMES:
        assert name in out


def test_check_axioms_pass(capsys):
    code, out, _ = run(capsys, "check-axioms", "--fixture", "fix-tm2")
    assert code == 0
    assert "FAIL" not in out


def test_check_axioms_fail_exit_one(capsys):
    code, out, _ = run(capsys, "check-axioms", "--fixture", "fix-so3-broken")
    assert code == 1
    assert "FAIL" in out
    assert "jacobi" in out


def test_unknown_fixture_exit_three(capsys):
    code, _, err = run(capsys, "check-axioms", "--fixture", "no-such")
    assert code == 3
    assert "error" in err


def test_missing_target_exit_three(capsys):
    code, _, err = run(capsys, "check-axioms")
    assert code == 3


def test_malformed_model_file_exit_three(capsys, tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[algebroid]\nrank = 2\nrho = [['1']]\n")
    code, _, err = run(capsys, "check-axioms", "--model", str(bad))
    assert code == 3


def test_usage_error_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


def test_unknown_suite_exit_three(capsys):
    code, _, err = run(capsys, "verify", "no-such-suite")
    assert code == 3


def test_verify_axioms_suite(capsys):
    code, out, _ = run(capsys, "verify", "axioms")
    assert code == 0
    assert "checks passed" in out


def test_verify_single_fixture(capsys):
    code, out, _ = run(capsys, "verify", "lifts", "--fixture", "fix-tm2")
    assert code == 0
    assert "fix-tm2" in out


def test_report_deterministic_given_seed(capsys, tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"r{i}.json"
        code, text, _ = run(capsys, "--seed", "42", "verify", "lifts",
                            "--fixture", "fix-tm2", "--out", str(path))
        assert code == 0
        outs.append((text, path.read_text()))
    assert outs[0] == outs[1]
    payload = json.loads(outs[0][1])
    assert payload["header"]["seed"] == 42
    assert all(r["verdict"] == "pass" for r in payload["records"])


def test_report_header_contents(capsys):
    _, out, _ = run(capsys, "verify", "axioms", "--fixture", "fix-tm2")
    assert "seed:" in out
    assert "sign_conventions" in out
    assert "tolerances" in out


def test_tol_scale_flag(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, _, _ = run(capsys, "--tol-scale", "10", "verify", "lifts",
                     "--fixture", "fix-tm2", "--out", str(path))
    assert code == 0
    payload = json.loads(path.read_text())
    assert payload["header"]["tol_scale"] == 10.0


def test_prolong_round_trip(capsys, tmp_path):
    path = tmp_path / "prolonged.toml"
    code, out, _ = run(capsys, "prolong", "--fixture", "fix-tm2",
                       "--out", str(path))
    assert code == 0
    lm = load(path)
    assert lm.model.coords == ("x1", "x2", "y1", "y2")
    assert lm.model.rank == 4
    # the prolonged model is itself a valid algebroid
    code2, out2, _ = run(capsys, "check-axioms", "--model", str(path))
    assert code2 == 0


def test_reduce_command(capsys):
    code, out, _ = run(capsys, "reduce", "--fixture", "fix-mag",
                       "--mu", "1.0")
    assert code == 0
    assert "reduced dimension: 4" in out


def test_dynamics_command(capsys):
    code, out, _ = run(capsys, "dynamics", "--fixture", "fix-so3",
                       "-T", "2.0")
    assert code == 0
    assert "casimir-conservation" in out
