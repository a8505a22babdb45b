import subprocess
import sys

import pytest

from coagbreak.cli import cli_main

SMALL = "[mesh]\ncells = 48\n[solver]\nt_end = 0.5\n[verify]\ntail_samples = 50\n"


@pytest.fixture
def cfg(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL)
    return path


def test_run_writes_outputs(tmp_path, cfg, capsys):
    out = tmp_path / "out"
    assert cli_main(["run", str(cfg), "--out", str(out)]) == 0
    assert (out / "trajectory.csv").exists() and (out / "moments.csv").exists()
    assert "M1=" in capsys.readouterr().out


def test_verify_passes(tmp_path, cfg):
    out = tmp_path / "out"
    assert cli_main(["verify", str(cfg), "--out", str(out), "--seed", "3"]) == 0
    assert "overall=pass" in (out / "report.txt").read_text()


def test_config_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[kernel]\nalpha = 0\n")
    assert cli_main(["run", str(bad), "--out", str(tmp_path)]) == 2
    assert "alpha must lie in (0, 1/2]" in capsys.readouterr().err
    assert cli_main(["run", str(tmp_path / "missing.cfg")]) == 2
    assert cli_main(["run", str(bad), "--threads", "0"]) == 2


def test_check_failure_exit(tmp_path):
    # four cells cannot resolve the closed-form density
    cfg = tmp_path / "coarse.cfg"
    cfg.write_text("[mesh]\ncells = 4\nz_min = 0.5\nn = 3\n[verify]\nz_o = 2\n")
    assert cli_main(["oracle-compare", str(cfg), "--out", str(tmp_path)]) == 1


def test_instability_exit(tmp_path):
    cfg = tmp_path / "stiff.cfg"
    cfg.write_text("[kernel]\nc = 1e14\n")
    assert cli_main(["run", str(cfg), "--out", str(tmp_path)]) == 3


def test_oracle_compare_default(tmp_path, capsys):
    assert cli_main(["oracle-compare", "--out", str(tmp_path)]) == 0
    assert "oracle_density=pass" in (tmp_path / "oracle.txt").read_text()


def test_convergence_study(tmp_path, cfg, capsys):
    assert cli_main(["convergence-study", str(cfg), "--levels", "3", "--out", str(tmp_path)]) == 0
    text = capsys.readouterr().out
    assert "mass_defect" in text and "observed orders" in text
    assert cli_main(["convergence-study", str(cfg), "--levels", "2"]) == 2


def test_threads_do_not_change_bytes(tmp_path, cfg):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli_main(["run", str(cfg), "--out", str(a), "--threads", "1"]) == 0
    assert cli_main(["run", str(cfg), "--out", str(b), "--threads", "8"]) == 0
    assert (a / "trajectory.csv").read_bytes() == (b / "trajectory.csv").read_bytes()


def test_module_entry_point(tmp_path, cfg):
    done = subprocess.run(
        [sys.executable, "-m", "coagbreak", "run", str(cfg), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert done.returncode == 0, done.stderr


def test_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli_main(["explode"])
    assert exc.value.code == 2
