import subprocess
import sys

import pytest

from l2lab.cli import EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_OK, main


def config(tmp_path, text):
    path = tmp_path / "cfg.toml"
    path.write_text(text)
    return str(path)


def test_betti_ok(tmp_path, capsys):
    path = config(tmp_path, 'complex = "circle_Z"\nladder = [2, 4]\n')
    assert main(["betti", "--config", path, "--out", str(tmp_path / "o")]) == EXIT_OK
    csv = (tmp_path / "o" / "betti.csv").read_text().splitlines()
    assert csv[0].startswith("# l2lab-csv/1 experiment=betti config=")
    assert "PASS" in capsys.readouterr().out


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("L2LAB_OUT", str(tmp_path / "env"))
    path = config(tmp_path, 'complex = "circle_Z"\nladder = [2]\n')
    assert main(["euler", "--config", path]) == EXIT_OK
    assert (tmp_path / "env" / "euler.csv").exists()


def test_hard_failure_exit_code(tmp_path):
    path = config(tmp_path, 'complex = "circle_Z"\nladder = [3]\nt_grid = [1.0]\n')
    assert main(["nfb", "--config", path, "--out", str(tmp_path)]) == EXIT_CHECK_FAILED


@pytest.mark.parametrize("text", ['complex = "circle_Z"\nladder = [3, 2]\n',
                                  'complex = "nowhere"\n',
                                  'complex = "wedge2_F2"\n'])
def test_config_errors(tmp_path, text, capsys):
    path = config(tmp_path, text)
    assert main(["zeta", "--config", path, "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_missing_config_and_threads(tmp_path):
    assert main(["heat", "--config", str(tmp_path / "missing.toml")]) == EXIT_CONFIG
    path = config(tmp_path, 'complex = "circle_Z"\n')
    assert main(["heat", "--config", path, "--threads", "0"]) == EXIT_CONFIG


def test_console_script(tmp_path):
    path = config(tmp_path, 'complex = "circle_Z"\nladder = [2]\n')
    out = subprocess.run([sys.executable, "-m", "l2lab.cli", "validate", "--config", path,
                          "--out", str(tmp_path), "--threads", "2"],
                         capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    with pytest.raises(SystemExit):
        main(["bogus"])
