import os
import subprocess
import sys

import pytest

from otto_spin.cli import main

REF_FLAGS = ["--b1", "4", "--b2", "3", "--t1", "1", "--t2", "0.5"]


def report(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    fields = {}
    for line in out.splitlines():
        if " = " in line:
            key, value = line.split(" = ", 1)
            fields.setdefault(key, value)
    return code, fields, out, err


def test_cycle_uncoupled(capsys):
    code, fields, out, _ = report(capsys, "cycle", "--j", "0", *REF_FLAGS)
    assert code == 0
    assert fields["eta"] == "0.25" and fields["leak"] == "0"
    assert fields["is_engine"] == "true"
    assert "[bound_audit]" in out and "applicable = false" in out


def test_cycle_coupled_beats_uncoupled(capsys):
    code, fields, out, _ = report(capsys, "cycle", "--j", "0.1", *REF_FLAGS)
    assert code == 0
    assert fields["beats_uncoupled"] == "true"
    assert fields["eta"] == "0.268380067653"  # 12 significant digits
    assert "population_gap = true" in out and "eta<bound = true" in out
    assert "consistent = true" in out


def test_cycle_report_order_is_fixed(capsys):
    _, _, out, _ = report(capsys, "cycle", "--j", "0.1", *REF_FLAGS)
    sections = [line for line in out.splitlines() if line.startswith("[")]
    assert sections == ["[params]", "[cycle]", "[regime]", "[bound_audit]", "[sign_link]"]


def test_cycle_undefined_marker(capsys):
    _, fields, _, _ = report(capsys, "cycle", "--j", "2", *REF_FLAGS)
    assert fields["bound"] == "undefined"


def test_cycle_negative_coupling(capsys):
    code, _, out, err = report(capsys, "cycle", "--j", "-1", *REF_FLAGS)
    assert code == 2 and out == ""
    assert "--j" in err and "J >= 0" in err


def test_cycle_temperature_order(capsys):
    code, _, _, err = report(capsys, "cycle", "--j", "0", "--b1", "4", "--b2", "3", "--t1", "0.5", "--t2", "1")
    assert code == 2 and "--t1" in err and "T1 > T2" in err


@pytest.mark.parametrize("value", ["nan", "inf", "abc"])
def test_non_finite_flag_is_usage_error(capsys, value):
    with pytest.raises(SystemExit) as exc:
        main(["cycle", "--j", value, *REF_FLAGS])
    assert exc.value.code == 2


def test_missing_flag_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["cycle", "--j", "0.1", "--b1", "4"])
    assert exc.value.code == 2


def sweep_args(path, *extra):
    return ["sweep", "--var", "J", "--lo", "0", "--hi", "1", "--steps", "101",
            *REF_FLAGS, "--output", str(path), *extra]


def test_sweep_writes_csv(capsys, tmp_path):
    path = tmp_path / "ref.csv"
    assert main(sweep_args(path)) == 0
    lines = path.read_bytes().split(b"\n")
    assert len(lines) == 103 and lines[-1] == b""
    assert lines[0].startswith(b"var,Q1,Q2,W,eta,")
    assert lines[1].split(b",")[4] == b"0.25"


def test_sweep_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(sweep_args(a)) == 0
    assert main(sweep_args(b)) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_unwritable_path(capsys, tmp_path):
    code = main(sweep_args(tmp_path / "missing" / "out.csv"))
    assert code == 3
    assert "cannot write" in capsys.readouterr().err


def test_sweep_invalid_grid(capsys, tmp_path):
    path = tmp_path / "out.csv"
    args = sweep_args(path)
    args[args.index("--lo") + 1] = "-0.5"
    assert main(args) == 2
    assert "J=-0.5" in capsys.readouterr().err
    assert not path.exists()


def test_sweep_missing_fixed_parameter(capsys, tmp_path):
    args = ["sweep", "--var", "T2", "--lo", "0.1", "--hi", "0.5", "--steps", "3",
            "--j", "0.1", "--b1", "4", "--b2", "3", "--output", str(tmp_path / "x.csv")]
    assert main(args) == 2
    assert "--t1" in capsys.readouterr().err


def test_verify_small(capsys):
    assert main(["verify", "--samples", "1000", "--seed", "0"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("seed=0 samples=1000")
    assert "FAIL" not in out


def test_verify_reproducible(capsys):
    main(["verify", "--samples", "500", "--seed", "3"])
    first = capsys.readouterr().out
    main(["verify", "--samples", "500", "--seed", "3"])
    assert capsys.readouterr().out == first


def test_verify_zero_samples(capsys):
    assert main(["verify", "--samples", "0"]) == 2
    assert "--samples must be >= 1" in capsys.readouterr().err


def test_verify_violation_exit_code(capsys, monkeypatch):
    import otto_spin.verify as verify

    real = verify._check

    def broken(params, r):
        out = real(params, r)
        out["first_law"] = False
        return out

    monkeypatch.setattr(verify, "_check", broken)
    assert main(["verify", "--samples", "20", "--seed", "1"]) == 1
    err = capsys.readouterr().err
    assert "violation first_law at J=" in err


def test_module_entry_point(tmp_path):
    env = dict(os.environ, OTTO_SPIN_THREADS="1")
    proc = subprocess.run(
        [sys.executable, "-m", "otto_spin", "cycle", "--j", "0", *REF_FLAGS],
        capture_output=True, text=True, env=env,
    )
    assert proc.returncode == 0
    assert "eta = 0.25" in proc.stdout
