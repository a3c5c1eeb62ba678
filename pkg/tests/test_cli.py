"""Harness tests: config parsing, sweeps, surface export, the command line."""

import csv
import os

import numpy as np
import pytest

from coopa import cli, radio
from coopa.learner import LearningParams
from coopa.runtime import build_agents, train

SMALL = """
[network]
n_power = 5

[experiment]
episodes = 400
seed = 3
betas = 0.0, 0.3, 0.9
"""


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text(SMALL)
    return path


class TestLoadConfig:
    def test_empty_file_gives_reference_defaults(self, tmp_path):
        path = tmp_path / "empty.ini"
        path.write_text("[network]\n")
        config = cli.load_config(path)
        assert config.gains == (2.5, 1.5)
        assert config.p_max_dbm == (10.0, 13.0)
        assert config.noise_dbm == 0.0
        assert config.beta == 0.3
        assert config.n_power == 21
        assert config.alpha == 0.5
        assert config.gamma == 0.9
        net = config.network()
        assert net.noise_mw == 1.0
        assert net.p_max_mw[1] == pytest.approx(10 ** 1.3)
        # default budget: 50 times the size of the largest Q-table
        assert config.resolve_episodes(net) == 50 * 21 * 21

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            cli.load_config(tmp_path / "nope.ini")

    def test_beta_out_of_range(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[network]\nbeta = 1.5\n")
        with pytest.raises(cli.ConfigValueError):
            cli.load_config(path)

    def test_n_power_too_small(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[network]\nn_power = 1\n")
        with pytest.raises(cli.ConfigValueError):
            cli.load_config(path)

    def test_unparseable_value(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[network]\nn_power = lots\n")
        with pytest.raises(cli.ConfigParseError):
            cli.load_config(path)

    def test_malformed_ini(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("n_power = 5\n")  # key before any section header
        with pytest.raises(cli.ConfigParseError):
            cli.load_config(path)

    def test_unknown_key_and_section(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[network]\nbandwidth = 20\n")
        with pytest.raises(cli.ConfigValueError):
            cli.load_config(path)
        path.write_text("[antenna]\ntilt = 3\n")
        with pytest.raises(cli.ConfigValueError):
            cli.load_config(path)

    def test_mismatched_lists(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[network]\ngains = 1.0, 2.0, 3.0\n")
        with pytest.raises(cli.ConfigValueError):
            cli.load_config(path)

    def test_epsilon_defaults_decay_over_all_episodes(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text("[experiment]\nepisodes = 1000\n")
        config = cli.load_config(path)
        params = config.learning(1000)
        assert params.epsilon_start == 1.0
        assert params.epsilon_end == 0.05
        assert params.epsilon_decay_episodes == 1000


class TestBetaRange:
    def test_colon_spec(self):
        betas = cli.parse_beta_range("0:1:0.05")
        assert len(betas) == 21
        assert betas[0] == 0.0
        assert betas[-1] == 1.0
        assert betas[6] == pytest.approx(0.3)

    def test_comma_list(self):
        assert cli.parse_beta_range("0.1, 0.5") == (0.1, 0.5)

    def test_garbage(self):
        with pytest.raises(cli.ConfigParseError):
            cli.parse_beta_range("0..1")
        with pytest.raises(cli.ConfigParseError):
            cli.parse_beta_range("1:0:0.1")


class TestSweep:
    def test_rows_and_oracle_columns(self, small_config, tmp_path):
        config = cli.load_config(small_config)
        path = cli.run_sweep(config, tmp_path / "sweep.csv")
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert [float(r["beta"]) for r in rows] == [0.0, 0.3, 0.9]
        for r in rows:
            opt = float(r["optimal_throughput"])
            assert opt >= float(r["greedy_throughput"]) - 1e-9
            assert opt >= float(r["simultaneous_throughput"]) - 1e-9
        zero = rows[0]
        assert float(zero["optimal_throughput"]) == pytest.approx(
            float(zero["simultaneous_throughput"])
        )

    def test_learned_matches_optimum_on_small_grid(self, small_config, tmp_path):
        config = cli.load_config(small_config)
        path = cli.run_sweep(config, tmp_path / "sweep.csv")
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        row = next(r for r in rows if float(r["beta"]) == 0.3)
        assert float(row["qcopa_p1_mw"]) == 0.0
        assert float(row["qcopa_p2_mw"]) == pytest.approx(10 ** 1.3)
        assert float(row["qcopa_throughput"]) == pytest.approx(
            float(row["optimal_throughput"])
        )

    def test_round_trip_precision(self, small_config, tmp_path):
        config = cli.load_config(small_config)
        path = cli.run_sweep(config, tmp_path / "sweep.csv")
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        net = config.network(0.9)
        from coopa import oracle

        expected = oracle.optimal_two_user(net).sum_throughput
        got = float(rows[2]["optimal_throughput"])
        # repr round-trips exactly, which is stronger than 6 significant digits
        assert got == expected

    def test_byte_identical_reruns(self, small_config, tmp_path):
        config = cli.load_config(small_config)
        a = cli.run_sweep(config, tmp_path / "a.csv")
        b = cli.run_sweep(config, tmp_path / "b.csv")
        assert open(a, "rb").read() == open(b, "rb").read()

    def test_thread_cap_does_not_change_output(self, small_config, tmp_path, monkeypatch):
        config = cli.load_config(small_config)
        monkeypatch.setenv("COOPA_THREADS", "1")
        a = cli.run_sweep(config, tmp_path / "serial.csv")
        monkeypatch.setenv("COOPA_THREADS", "2")
        b = cli.run_sweep(config, tmp_path / "parallel.csv")
        assert open(a, "rb").read() == open(b, "rb").read()

    def test_bad_thread_cap(self, small_config, tmp_path, monkeypatch):
        config = cli.load_config(small_config)
        monkeypatch.setenv("COOPA_THREADS", "many")
        with pytest.raises(cli.ConfigValueError):
            cli.run_sweep(config, tmp_path / "x.csv")

    def test_needs_two_agents(self, tmp_path):
        config = cli.ExperimentConfig(gains=(1.0,), p_max_dbm=(10.0,))
        with pytest.raises(cli.ConfigValueError):
            cli.run_sweep(config, tmp_path / "x.csv")


class TestSurface:
    def test_untrained_surface_is_zero(self, tmp_path):
        cfg = radio.two_cell_config(0.3, n_power=4)
        agents = build_agents(cfg)
        path = cli.export_q_surface(agents, tmp_path / "q.csv")
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 16
        assert all(float(r["global_q"]) == 0.0 for r in rows)

    def test_trained_surface_argmax_is_policy(self, tmp_path):
        cfg = radio.two_cell_config(0.3, n_power=5)
        episodes = 50 * 25
        params = LearningParams(epsilon_decay_episodes=episodes)
        agents, _ = train(cfg, params, episodes=episodes, seed=1)
        path = cli.export_q_surface(agents, tmp_path / "q.csv")
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 25
        best = max(rows, key=lambda r: float(r["global_q"]))
        assert float(best["p1_mw"]) == 0.0
        assert float(best["p2_mw"]) == pytest.approx(10 ** 1.3)

    def test_needs_two_agents(self, tmp_path):
        cfg = radio.NetworkConfig(
            gain=np.array([1.0]), beta=np.zeros((1, 1)), noise_mw=1.0,
            p_max_dbm=np.array([10.0]), n_power=3,
        )
        agents = build_agents(cfg)
        with pytest.raises(ValueError):
            cli.export_q_surface(agents, tmp_path / "q.csv")


class TestCommandLine:
    def test_run_writes_trace(self, tmp_path):
        config = tmp_path / "exp.ini"
        config.write_text("[network]\nn_power = 4\n[experiment]\nepisodes = 50\n")
        out = tmp_path / "results"
        rc = cli.main(["run", "--config", str(config), "--out", str(out)])
        assert rc == 0
        trace = out / "trace.csv"
        assert trace.exists()
        assert len(trace.read_text().strip().splitlines()) == 51

    def test_run_seed_override_changes_output(self, tmp_path):
        config = tmp_path / "exp.ini"
        config.write_text(
            "[network]\nn_power = 4\n[learning]\nepsilon_end = 1.0\n"
            "epsilon_start = 1.0\n[experiment]\nepisodes = 40\n"
        )
        outs = []
        for seed in (1, 2):
            out = tmp_path / f"r{seed}"
            rc = cli.main(["run", "--config", str(config), "--out", str(out),
                           "--seed", str(seed)])
            assert rc == 0
            outs.append((out / "trace.csv").read_bytes())
        assert outs[0] != outs[1]

    def test_sweep_subcommand(self, tmp_path):
        config = tmp_path / "exp.ini"
        config.write_text("[network]\nn_power = 4\n[experiment]\nepisodes = 60\n")
        out = tmp_path / "results"
        rc = cli.main(["sweep", "--config", str(config), "--betas", "0:0.4:0.2",
                       "--out", str(out)])
        assert rc == 0
        with open(out / "sweep.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert [float(r["beta"]) for r in rows] == [0.0, 0.2, 0.4]

    def test_surface_subcommand(self, tmp_path):
        config = tmp_path / "exp.ini"
        config.write_text("[network]\nn_power = 4\n[experiment]\nepisodes = 60\n")
        out_file = tmp_path / "surface.csv"
        rc = cli.main(["surface", "--config", str(config), "--beta", "0.3",
                       "--out", str(out_file)])
        assert rc == 0
        with open(out_file, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 16

    def test_missing_config_reports_error(self, tmp_path, capsys):
        rc = cli.main(["run", "--config", str(tmp_path / "nope.ini")])
        assert rc == 2
        assert "error" in capsys.readouterr().out

    def test_bad_value_reports_error(self, tmp_path, capsys):
        config = tmp_path / "exp.ini"
        config.write_text("[network]\nbeta = 2.0\n")
        rc = cli.main(["run", "--config", str(config)])
        assert rc == 2
        assert "beta" in capsys.readouterr().out
