"""CLI: exit codes, config resolution, end-to-end command flows."""

import os
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from photobench import cli

PKG_DATA = Path(cli.__file__).parent / "data"

GOOD_RESPONSE = '''A random search in a fenced block.
```python
import numpy as np

class CliSearch:
    def __init__(self, budget, dim):
        self.budget = budget
        self.dim = dim

    def __call__(self, func):
        lb = np.asarray(func.bounds.lb, dtype=float)
        ub = np.asarray(func.bounds.ub, dtype=float)
        rng = np.random.default_rng(3)
        for _ in range(self.budget):
            func(rng.uniform(lb, ub))
```'''


def run_cli(args, env_extra=None):
    env = dict(os.environ)
    env["MPLBACKEND"] = "Agg"
    if env_extra:
        env.update(env_extra)
    return subprocess.run([sys.executable, "-m", "photobench.cli", *args],
                          capture_output=True, text=True, env=env, timeout=600)


class TestExitCodes:
    def test_validate_ok(self):
        proc = run_cli(["validate"])
        assert proc.returncode == 0
        assert proc.stdout.count("PASS") >= 6
        assert "FAIL" not in proc.stdout
        assert "f_qw" in proc.stdout

    def test_unknown_flag_is_usage_error(self):
        proc = run_cli(["bench", "--frobnicate"])
        assert proc.returncode == 1

    def test_unknown_command_is_usage_error(self):
        proc = run_cli(["transmogrify"])
        assert proc.returncode == 1

    def test_corrupted_data_fails_named_check(self, tmp_path):
        data = tmp_path / "data"
        shutil.copytree(PKG_DATA, data)
        (data / "au_nk.csv").write_text("wavelength_nm,n,k\n600,1.0,-2.0\n",
                                        encoding="utf-8")
        proc = run_cli(["validate"], env_extra={"PHOTOBENCH_DATA_DIR": str(data)})
        assert proc.returncode == 2
        assert "FAIL dispersion-data" in proc.stdout

    def test_plot_missing_results_dir(self, tmp_path):
        proc = run_cli(["plot", "--results", str(tmp_path / "absent")])
        assert proc.returncode == 2


class TestBenchPlotFlow:
    def test_bench_then_plot(self, tmp_path):
        out = tmp_path / "results"
        proc = run_cli(["bench", "--instance", "mini-bragg", "--algo", "de",
                        "--runs", "2", "--seed", "1", "--budget-override", "50",
                        "--out", str(out)])
        assert proc.returncode == 0, proc.stderr
        assert "resolved configuration" in proc.stdout
        csvs = sorted(p.name for p in out.glob("*.csv"))
        assert csvs == ["aggregate.csv", "mini-bragg__de__run0.csv",
                        "mini-bragg__de__run1.csv"]

        proc = run_cli(["plot", "--results", str(out)])
        assert proc.returncode == 0, proc.stderr
        svgs = sorted(p.name for p in out.glob("*.svg"))
        assert svgs == ["mini-bragg__convergence.svg", "mini-bragg__final_fitness.svg"]
        assert (out / "mini-bragg__convergence.csv").exists()
        assert (out / "mini-bragg__final_fitness.csv").exists()
        assert b"<svg" in (out / "mini-bragg__convergence.svg").read_bytes()[:200]

    def test_config_file_merge_flags_win(self, tmp_path):
        cfg = tmp_path / "bench.cfg"
        cfg.write_text("runs = 5\nbudget_override = 60\n", encoding="utf-8")
        out = tmp_path / "results"
        proc = run_cli(["bench", "--instance", "mini-bragg", "--algo", "de",
                        "--config", str(cfg), "--runs", "1", "--seed", "0",
                        "--out", str(out)])
        assert proc.returncode == 0, proc.stderr
        # flag --runs 1 beats config runs = 5; config budget_override applies
        assert len(list(out.glob("*run*.csv"))) == 1
        assert "budget_override = 60" in proc.stdout

    def test_unknown_config_key_rejected(self, tmp_path):
        cfg = tmp_path / "bench.cfg"
        cfg.write_text("carrier_pigeons = 7\n", encoding="utf-8")
        proc = run_cli(["bench", "--config", str(cfg)])
        assert proc.returncode == 2


class TestLandscapeCommand:
    def test_scan_and_render(self, tmp_path):
        out = tmp_path / "scan.csv"
        proc = run_cli(["landscape", "--instance", "ellipsometry", "--grid", "6",
                        "--render", "--out", str(out)])
        assert proc.returncode == 0, proc.stderr
        assert out.exists()
        assert out.with_suffix(".svg").exists()
        lines = out.read_text().splitlines()
        assert lines[0] == "# instance=ellipsometry"
        assert len([l for l in lines if not l.startswith("#")]) == 7


class TestDiscoverCommand:
    def test_mock_script_archive(self, tmp_path):
        script = tmp_path / "mock.txt"
        script.write_text(GOOD_RESPONSE, encoding="utf-8")
        out = tmp_path / "arch"
        proc = run_cli(["discover", "--instance", "mini-bragg", "--mu", "1",
                        "--lambda", "1", "--plus", "--total", "10",
                        "--runs-per-candidate", "1", "--budget-override", "20",
                        "--seed", "0", "--mock-script", str(script),
                        "--out", str(out)])
        assert proc.returncode == 0, proc.stderr
        manifest = (out / "manifest.csv").read_text().splitlines()
        assert len(manifest) == 11  # header + 10 candidates
        assert len(list(out.glob("*.py"))) == 10
        assert "best candidate" in proc.stdout

    def test_discover_requires_a_client(self):
        proc = run_cli(["discover", "--instance", "mini-bragg"])
        assert proc.returncode == 1


class TestMainApi:
    def test_main_returns_exit_codes(self, capsys):
        assert cli.main(["validate"]) == 0
        with pytest.raises(SystemExit) as exc:
            cli.main(["--bogus"])
        assert exc.value.code == 1
