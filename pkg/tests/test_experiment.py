import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amcsim.agent import AgentConfig
from amcsim.cli import main as cli_main
from amcsim.experiment import (converged_from_csv, dynamic_scenario,
                               load_config, moving_average,
                               quasi_static_scenario, read_experiment_csv,
                               run_policy_experiment, run_trial,
                               sweep_switching_cost, write_experiment_csv)
from amcsim.linkmath import DEFAULT_MCS_TABLE, rate
from amcsim.neuralnet import load_weights


class TestMovingAverage:
    def test_constant_signal(self):
        np.testing.assert_allclose(moving_average(np.full(500, 7.0)), 7.0)

    def test_truncated_head(self):
        x = np.arange(1.0, 6.0)
        out = moving_average(x, window=3)
        np.testing.assert_allclose(out, [1.0, 1.5, 2.0, 3.0, 4.0])

    def test_step_response(self):
        # step at frame 101 of a length-300 signal, window 200:
        # frame 150 averages 100 zeros and 50 ones over 150 frames
        x = np.zeros(300)
        x[100:] = 1.0
        out = moving_average(x, window=200)
        assert out[149] == pytest.approx(50.0 / 150.0)
        assert out[50] == 0.0
        assert out[298] == pytest.approx(199.0 / 200.0)
        assert out[299] == 1.0

    def test_window_one_is_identity(self):
        x = np.array([3.0, -1.0, 4.0])
        np.testing.assert_array_equal(moving_average(x, window=1), x)

    def test_bad_window_rejected(self):
        with pytest.raises(ValueError):
            moving_average(np.ones(5), window=0)

    @given(st.lists(st.floats(min_value=-1e6, max_value=1e6), min_size=1,
                    max_size=300),
           st.integers(min_value=1, max_value=250))
    @settings(max_examples=60)
    def test_matches_naive_reference(self, xs, window):
        x = np.array(xs)
        out = moving_average(x, window=window)
        for i in range(len(x)):
            lo = max(0, i + 1 - window)
            assert out[i] == pytest.approx(np.mean(x[lo:i + 1]), rel=1e-9,
                                           abs=1e-6)


class TestRunTrial:
    def test_oracle_rate_consistent_with_logged_sinr(self):
        sc = quasi_static_scenario(frames=300, trials=1)
        s = run_trial(sc, "oracle", seed=11)
        for i in range(s.frames):
            gbar = 10 ** (s.gamma_bar_db[i] / 10)
            expected = max(range(len(DEFAULT_MCS_TABLE)),
                           key=lambda k: (rate(DEFAULT_MCS_TABLE[k], gbar, 1000),
                                          -k))
            assert s.action[i] == DEFAULT_MCS_TABLE[expected].index

    def test_random_policy_mean_rate_at_huge_snr(self):
        # with no interference and 60 dB SNR every packet succeeds, so the
        # uniform policy averages (1+2+4+6)/4 = 3.25 kbits per frame
        sc = quasi_static_scenario(frames=4000, trials=1, avg_snr_db=60.0,
                                   inr_db=(), miss_prob=())
        s = run_trial(sc, "random", seed=1)
        assert np.all(s.rate > 0)
        assert np.mean(s.rate) == pytest.approx(3250.0, rel=0.03)

    def test_rate_excludes_switching_cost(self):
        sc = quasi_static_scenario(frames=500, trials=1, switching_cost=400.0)
        s = run_trial(sc, "random", seed=2)
        allowed = {0.0} | {m.bits_per_symbol * 1000.0 for m in DEFAULT_MCS_TABLE}
        assert set(np.unique(s.rate)) <= allowed

    def test_reward_matches_rate_minus_cost_on_switches(self):
        sc = quasi_static_scenario(frames=500, trials=1, switching_cost=400.0)
        s = run_trial(sc, "random", seed=2)
        np.testing.assert_allclose(s.reward, s.rate - 400.0 * s.switched)

    def test_first_frame_never_counts_as_switch(self):
        for policy in ("oracle", "snr", "random", "ucb"):
            sc = quasi_static_scenario(frames=10, trials=1)
            assert run_trial(sc, policy, seed=3).switched[0] == 0.0

    def test_identical_seed_identical_series(self):
        sc = dynamic_scenario(frames=800, trials=1)
        a = run_trial(sc, "dqn", seed=9)
        b = run_trial(sc, "dqn", seed=9)
        np.testing.assert_array_equal(a.action, b.action)
        np.testing.assert_array_equal(a.reward, b.reward)
        np.testing.assert_array_equal(a.moving_avg, b.moving_avg)

    def test_different_seeds_differ(self):
        sc = quasi_static_scenario(frames=400, trials=1)
        a = run_trial(sc, "random", seed=1)
        b = run_trial(sc, "random", seed=2)
        assert not np.array_equal(a.action, b.action)

    def test_unknown_policy_rejected(self):
        with pytest.raises(ValueError):
            run_trial(quasi_static_scenario(frames=10), "genie", seed=0)

    def test_converged_rate_uses_tail(self):
        sc = quasi_static_scenario(frames=300, trials=1)
        s = run_trial(sc, "oracle", seed=5)
        assert s.converged_rate == pytest.approx(float(np.mean(s.moving_avg)))


class TestRunPolicyExperiment:
    def test_single_trial_equals_run_trial(self):
        sc = quasi_static_scenario(frames=400, trials=1)
        res = run_policy_experiment(sc, "oracle")
        s = run_trial(sc, "oracle", seed=sc.seed)
        np.testing.assert_array_equal(res.avg_rate, s.rate)
        np.testing.assert_array_equal(res.avg_moving, s.moving_avg)
        assert res.per_trial_converged == (s.converged_rate,)

    def test_average_is_pointwise_mean(self):
        sc = quasi_static_scenario(frames=300, trials=3)
        res = run_policy_experiment(sc, "random")
        manual = np.mean([run_trial(sc, "random", seed=sc.seed + i).moving_avg
                          for i in range(3)], axis=0)
        np.testing.assert_allclose(res.avg_moving, manual, rtol=1e-12)

    def test_trial_seeds_are_consecutive(self):
        sc = quasi_static_scenario(frames=200, trials=2, seed=40)
        res = run_policy_experiment(sc, "random")
        expected = np.mean([run_trial(sc, "random", seed=40).rate,
                            run_trial(sc, "random", seed=41).rate], axis=0)
        np.testing.assert_allclose(res.avg_rate, expected, rtol=1e-12)

    def test_worker_env_var_does_not_change_results(self, monkeypatch):
        sc = quasi_static_scenario(frames=200, trials=2)
        monkeypatch.setenv("AMCSIM_WORKERS", "1")
        a = run_policy_experiment(sc, "oracle")
        monkeypatch.setenv("AMCSIM_WORKERS", "2")
        b = run_policy_experiment(sc, "oracle")
        np.testing.assert_array_equal(a.avg_rate, b.avg_rate)

    def test_bad_trials_rejected(self):
        with pytest.raises(ValueError):
            run_policy_experiment(quasi_static_scenario(frames=10), "oracle",
                                  trials=0)

    def test_save_and_reload_weights(self, tmp_path):
        sc = quasi_static_scenario(frames=600, trials=1)
        wpath = tmp_path / "weights.txt"
        run_policy_experiment(sc, "dqn", save_weights_path=wpath)
        net = load_weights(wpath, expected_input=AgentConfig().input_size,
                           expected_output=4)
        q = net.forward(np.zeros(AgentConfig().input_size))
        assert q.shape == (4,) and np.all(np.isfinite(q))


class TestSweep:
    def test_oracle_rows_identical_across_costs(self):
        sc = quasi_static_scenario(frames=400, trials=1)
        out = sweep_switching_cost(sc, [0.0, 500.0], policies=("oracle",))
        a = out[("oracle", 0.0)]
        b = out[("oracle", 500.0)]
        np.testing.assert_array_equal(a.avg_rate, b.avg_rate)
        assert a.converged_rate == b.converged_rate
        assert a.switching_rate == b.switching_rate

    def test_result_keys(self):
        sc = quasi_static_scenario(frames=100, trials=1)
        out = sweep_switching_cost(sc, [0.0, 1000.0], policies=("snr", "random"))
        assert set(out) == {("snr", 0.0), ("snr", 1000.0),
                            ("random", 0.0), ("random", 1000.0)}

    def test_negative_cost_rejected(self):
        with pytest.raises(ValueError):
            sweep_switching_cost(quasi_static_scenario(frames=10), [-1.0])


class TestCsvRoundTrip:
    def test_row_count_and_round_trip(self, tmp_path):
        sc = quasi_static_scenario(frames=250, trials=2)
        res = run_policy_experiment(sc, "snr")
        path = tmp_path / "snr.csv"
        write_experiment_csv(res, path)
        data = read_experiment_csv(path)
        assert len(data["frame"]) == 250
        np.testing.assert_array_equal(data["rate"], res.avg_rate)
        np.testing.assert_array_equal(data["moving_avg"], res.avg_moving)
        np.testing.assert_array_equal(data["gamma0_db"], res.avg_gamma0_db)

    def test_converged_from_csv_matches_result(self, tmp_path):
        sc = quasi_static_scenario(frames=300, trials=1)
        res = run_policy_experiment(sc, "oracle")
        path = tmp_path / "oracle.csv"
        write_experiment_csv(res, path)
        conv, sw = converged_from_csv(path)
        assert conv == res.converged_rate
        assert sw == res.switching_rate

    def test_byte_identical_rewrites(self, tmp_path):
        sc = dynamic_scenario(frames=200, trials=1)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_experiment_csv(run_policy_experiment(sc, "dqn"), p1)
        write_experiment_csv(run_policy_experiment(sc, "dqn"), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_wrong_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError):
            read_experiment_csv(path)


class TestConfigFiles:
    def test_round_trip_keys(self, tmp_path):
        path = tmp_path / "s.cfg"
        path.write_text(
            "# comment\n"
            "avg_snr_db = 17.5\n"
            "inr_db = 5, 5, 5\n"
            "miss_prob = 1, 1, 0.5\n"
            "rho = 0.0\n"
            "frames = 1234\n"
            "trials = 3\n"
            "seed = 9\n"
            "phi = 5\n"
            "learning_rate = 0.02\n")
        sc, ag = load_config(path)
        assert sc.avg_snr_db == 17.5
        assert sc.inr_db == (5.0, 5.0, 5.0)
        assert sc.miss_prob == (1.0, 1.0, 0.5)
        assert sc.frames == 1234 and sc.trials == 3 and sc.seed == 9
        assert ag.phi == 5 and ag.learning_rate == 0.02
        assert ag.input_size == 21

    def test_shipped_quasi_static_matches_preset(self):
        sc, ag = load_config("configs/quasi_static.cfg")
        assert sc == quasi_static_scenario()
        assert ag == AgentConfig()

    def test_shipped_dynamic_matches_preset(self):
        sc, ag = load_config("configs/dynamic.cfg")
        assert sc == dynamic_scenario()
        assert ag == AgentConfig()

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "s.cfg"
        path.write_text("snr = 20\n")
        with pytest.raises(ValueError):
            load_config(path)

    def test_missing_equals_rejected(self, tmp_path):
        path = tmp_path / "s.cfg"
        path.write_text("frames 100\n")
        with pytest.raises(ValueError):
            load_config(path)


class TestCli:
    def test_run_writes_csv_and_summary(self, tmp_path, capsys):
        rc = cli_main(["run", "--policy", "oracle", "--trials", "1",
                       "--frames", "300", "--seed", "4",
                       "--out-dir", str(tmp_path)])
        assert rc == 0
        assert (tmp_path / "oracle_c0.csv").exists()
        assert (tmp_path / "summary.csv").exists()
        assert "converged_rate" in capsys.readouterr().out

    def test_run_switch_cost_in_filename(self, tmp_path):
        cli_main(["run", "--policy", "random", "--trials", "1",
                  "--frames", "100", "--switch-cost", "1500",
                  "--out-dir", str(tmp_path)])
        assert (tmp_path / "random_c1500.csv").exists()

    def test_run_respects_config_file(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("frames = 120\ntrials = 1\nseed = 2\n")
        cli_main(["run", "--config", str(cfg), "--policy", "snr",
                  "--out-dir", str(tmp_path)])
        data = read_experiment_csv(tmp_path / "snr_c0.csv")
        assert len(data["frame"]) == 120

    def test_sweep_outputs_per_cost_files(self, tmp_path):
        rc = cli_main(["sweep", "--costs", "0,2", "--policies", "oracle",
                       "--trials", "1", "--frames", "150",
                       "--out-dir", str(tmp_path)])
        assert rc == 0
        assert (tmp_path / "oracle_c0.csv").exists()
        assert (tmp_path / "oracle_c2.csv").exists()
        lines = (tmp_path / "summary.csv").read_text().splitlines()
        assert lines[0] == "policy,switching_cost,converged_rate,switching_rate"
        assert len(lines) == 3

    def test_cli_rate_matches_api(self, tmp_path):
        cli_main(["run", "--policy", "oracle", "--trials", "1",
                  "--frames", "300", "--out-dir", str(tmp_path)])
        conv, _ = converged_from_csv(tmp_path / "oracle_c0.csv")
        sc = quasi_static_scenario(frames=300, trials=1)
        assert conv == run_policy_experiment(sc, "oracle").converged_rate

    def test_save_then_load_weights_via_cli(self, tmp_path):
        w = tmp_path / "w.txt"
        cli_main(["run", "--policy", "dqn", "--trials", "1", "--frames", "400",
                  "--out-dir", str(tmp_path), "--save-weights", str(w)])
        assert w.exists()
        rc = cli_main(["run", "--policy", "dqn", "--trials", "1",
                       "--frames", "200", "--out-dir", str(tmp_path / "second"),
                       "--load-weights", str(w)])
        assert rc == 0
