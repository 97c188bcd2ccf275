import csv
import os

import numpy as np
import pytest

from cvsheet.cli import main
from cvsheet.config import ConfigError, format_config, parse_config, with_overrides
from cvsheet.evolution import TIMESERIES_COLUMNS, RunConfig, SolverState, run
from cvsheet.initial_data import InitialDataSpec
from cvsheet.io import (
    ENERGY_REPORT_COLUMNS,
    OUTPUT_ROOT_ENV,
    OutputError,
    emit_snapshot,
    emit_timeseries,
    load_snapshot,
    read_csv,
    resolve_out_dir,
)
from cvsheet.runner import diagnose_directory, identity_suite, run_to_directory, sweep
from cvsheet.spectral import Grid

from conftest import random_fields

MINIMAL = """\
# minimal run
mu = 1
delta = 0.5
n_points = 128
dt = auto
t_end = 1.0
initial.kind = single_mode
initial.amplitude = 0.01
initial.mode = 1
"""


class TestParseConfig:
    def test_minimal(self):
        cfg = parse_config(MINIMAL)
        assert (cfg.mu, cfg.delta, cfg.n_points, cfg.dt, cfg.t_end) == (1.0, 0.5, 128, None, 1.0)
        assert cfg.initial_data == InitialDataSpec(amplitudes=(0.01,), modes=(1,))
        assert cfg.mode == "second_order" and cfg.dealias == pytest.approx(2 / 3)

    def test_all_keys(self):
        text = MINIMAL.replace("initial.kind = single_mode", "initial.kind = random_band") + """
dealias = 1/2
mode = first
blowup_threshold = 1e3
enforce_stability = no
halt_on_violation = yes
snapshot_every = 10
initial.seed = 0x2A
initial.band = 2, 9
initial.decay = 1.5
initial.phase = 0.25
initial.velocity = right
"""
        cfg = parse_config(text)
        assert cfg.dealias == 0.5 and cfg.mode == "first_order" and cfg.blowup_threshold == 1e3
        assert not cfg.enforce_stability and cfg.halt_on_violation and cfg.snapshot_every == 10
        init = cfg.initial_data
        assert (init.kind, init.seed, init.band, init.decay_exponent, init.phases, init.velocity) == (
            "random_band", 42, (2, 9), 1.5, (0.25,), "right")

    def test_delta_above_mu_names_delta(self):
        with pytest.raises(ConfigError) as err:
            parse_config(MINIMAL.replace("delta = 0.5", "delta = 2"))
        assert err.value.key == "delta" and err.value.line == 3

    def test_duplicate_cites_both_lines(self):
        with pytest.raises(ConfigError, match="line 2.*line 10"):
            parse_config(MINIMAL + "mu = 2\n")

    def test_alias_conflict(self):
        with pytest.raises(ConfigError, match="conflicts"):
            parse_config(MINIMAL + "initial.modes = 2\n")

    @pytest.mark.parametrize("extra, key", [
        ("colour = red\n", "colour"),
        ("n_points = 12.5\n", "n_points"),
        ("enforce_stability = maybe\n", "enforce_stability"),
        ("mode = third\n", "mode"),
        ("initial.band = 1\n", "initial.band"),
        ("snapshot_every = -1\n", "snapshot_every"),
        ("dt = -0.1\n", "dt"),
    ])
    def test_errors_name_key(self, extra, key):
        text = MINIMAL.replace("n_points = 128\n", "") + ("n_points = 128\n" if key != "n_points" else "")
        with pytest.raises(ConfigError) as err:
            parse_config(text + extra)
        assert err.value.key == key and err.value.line is not None

    @pytest.mark.parametrize("key", ["mu", "delta", "n_points", "t_end", "initial.kind"])
    def test_missing(self, key):
        text = "\n".join(line for line in MINIMAL.splitlines() if not line.startswith(key + " "))
        with pytest.raises(ConfigError, match="missing") as err:
            parse_config(text)
        assert err.value.key == key

    def test_malformed_line(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config("mu = 1\njust words\n")

    def test_format_roundtrip(self):
        cfg = with_overrides(parse_config(MINIMAL), seed=9, dt=0.01)
        assert parse_config(format_config(cfg)) == cfg


class TestIO:
    def test_snapshot_roundtrip(self, tmp_path, grid64):
        phi, phit = random_fields(grid64, 2, seed=1)
        p, q = emit_snapshot(tmp_path / "snaps", 7, SolverState(0.0, phi, phit))
        assert p.name == "phi_000007.txt" and q.name == "phit_000007.txt"
        assert np.max(np.abs(load_snapshot(p).coeffs - phi.coeffs)) == 0
        assert np.max(np.abs(load_snapshot(q).coeffs - phit.coeffs)) == 0

    def test_header_only(self, tmp_path):
        path = tmp_path / "ts.csv"
        assert emit_timeseries(path, []) == 0
        assert path.read_text() == ",".join(TIMESERIES_COLUMNS) + "\n"
        assert read_csv(path)["t"].size == 0

    def test_thousand_steps(self, tmp_path):
        cfg = RunConfig(mu=1, delta=0.5, n_points=16, t_end=1.0, dt=1e-3)
        s = run_to_directory(cfg, tmp_path)
        t = read_csv(tmp_path / "timeseries.csv")["t"]
        assert s.steps == 1000 and t.size == 1001 and np.all(np.diff(t) > 0)

    def test_unwritable(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(OutputError, match="file"):
            emit_timeseries(blocker / "ts.csv", [])

    def test_output_root(self, monkeypatch, tmp_path):
        monkeypatch.setenv(OUTPUT_ROOT_ENV, str(tmp_path))
        assert resolve_out_dir(None, "x") == tmp_path / "x"
        assert resolve_out_dir("y") == type(tmp_path)("y")


class TestRunner:
    def test_reproducible(self, tmp_path):
        cfg = parse_config(MINIMAL.replace("single_mode", "random_band").replace("n_points = 128", "n_points = 32"))
        run_to_directory(cfg, tmp_path / "a")
        run_to_directory(cfg, tmp_path / "b")
        assert (tmp_path / "a/timeseries.csv").read_bytes() == (tmp_path / "b/timeseries.csv").read_bytes()

    def test_snapshots_and_diagnose(self, tmp_path):
        cfg = with_overrides(parse_config(MINIMAL), n_points=32, t_end=2.0, dt=0.01, snapshot_every=40)
        s = run_to_directory(cfg, tmp_path)
        index = list(csv.reader(open(tmp_path / "snapshots/index.csv")))
        assert index[0] == ["step", "t"] and int(index[-1][0]) == s.steps
        assert (tmp_path / f"snapshots/phi_{s.steps:06d}.txt").exists()
        fit = diagnose_directory(tmp_path)
        assert not fit["skipped"] and fit["holds"]
        report = read_csv(tmp_path / "energy_report.csv")
        assert tuple(report) == ENERGY_REPORT_COLUMNS
        ts = read_csv(tmp_path / "timeseries.csv")
        np.testing.assert_array_equal(report["energy"], ts["energy_r2"])
        assert np.all(report["bound_ok"] == 1)

    def test_run_matches_library(self, tmp_path):
        cfg = with_overrides(parse_config(MINIMAL), n_points=32, t_end=0.2)
        run_to_directory(cfg, tmp_path)
        ts = read_csv(tmp_path / "timeseries.csv")
        rows = run(cfg).rows
        np.testing.assert_array_equal(ts["h3_norm"], [r["h3_norm"] for r in rows])

    def test_identity_suite(self):
        results = identity_suite(trials=20, n_points=64, kernel_bound=32)
        assert all(r.passed for r in results), [r for r in results if not r.passed]

    def test_sweep(self, tmp_path):
        base = with_overrides(parse_config(MINIMAL), n_points=16, t_end=0.1)
        results = sweep(base, [0.5, -1.0], [0.01, 0.02], tmp_path, threads=1)
        assert len(results) == 4
        assert all(r[2] == "completed" for r in results)
        assert (tmp_path / "mu_-1_amp_0.02/timeseries.csv").exists()
        assert len((tmp_path / "sweep.csv").read_text().splitlines()) == 5


class TestCLI:
    def write(self, tmp_path, text=MINIMAL):
        p = tmp_path / "cfg.txt"
        p.write_text(text.replace("n_points = 128", "n_points = 32"))
        return p

    def test_run_and_diagnose(self, tmp_path, capsys):
        cfg = self.write(tmp_path, MINIMAL.replace("dt = auto", "dt = 0.01"))
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "out"), "--mode", "second"]) == 0
        assert "completed" in capsys.readouterr().out
        assert main(["diagnose", str(tmp_path / "out")]) == 0
        assert "C_hat" in capsys.readouterr().out

    def test_seed_override(self, tmp_path):
        cfg = self.write(tmp_path, MINIMAL.replace("single_mode", "random_band"))
        main(["run", "--config", str(cfg), "--seed", "5", "--out", str(tmp_path / "o")])
        assert "initial.seed = 5" in (tmp_path / "o/config.txt").read_text()

    def test_env_output_root(self, tmp_path, monkeypatch):
        cfg = self.write(tmp_path)
        monkeypatch.setenv(OUTPUT_ROOT_ENV, str(tmp_path / "root"))
        assert main(["run", "--config", str(cfg), "--mode", "linear"]) == 0
        assert (tmp_path / "root/cfg/timeseries.csv").exists()

    def test_config_error_exit(self, tmp_path, capsys):
        cfg = self.write(tmp_path, MINIMAL.replace("delta = 0.5", "delta = 2"))
        assert main(["run", "--config", str(cfg)]) == 1
        assert "delta" in capsys.readouterr().err

    def test_kernel_dump(self, capsys):
        assert main(["kernel-dump", "--m=-1:-1", "--l=3:3"]) == 0
        assert capsys.readouterr().out.splitlines()[1] == "-1,3,F_I,0,8"

    def test_check_identities(self, capsys):
        assert main(["check-identities", "--trials", "10", "--n-points", "64"]) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out and out.count("PASS") == 12

    def test_sweep(self, tmp_path, capsys):
        cfg = self.write(tmp_path, MINIMAL.replace("t_end = 1.0", "t_end = 0.05"))
        argv = ["sweep", "--config", str(cfg), "--mu", "1,2", "--amplitude", "0.01", "--threads", "2",
                "--out", str(tmp_path / "sw")]
        assert main(argv) == 0
        assert len(os.listdir(tmp_path / "sw")) == 3
