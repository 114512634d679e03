"""Command-line entry points: run, sweep, selftest."""

import argparse
import dataclasses
import logging
import math
import os
import sys

import numpy as np

from . import experiment, linkmath
from .agent import AgentConfig
from .envsim import FadingProcess, fading_step, initial_fading
from .linkmath import DEFAULT_MCS_TABLE, per, q_function, ser
from .neuralnet import QNetwork, gradient_check

log = logging.getLogger("amcsim")


def _csv_name(policy, cost):
    tag = f"{cost:g}".replace(".", "p")
    return f"{policy}_c{tag}.csv"


def _load_or_default(path):
    if path is None:
        return experiment.quasi_static_scenario(), AgentConfig()
    return experiment.load_config(path)


def _apply_overrides(scenario, agent_cfg, args):
    sc_over = {}
    for name, key in (("trials", "trials"), ("frames", "frames"),
                      ("seed", "seed"), ("switch_cost", "switching_cost")):
        val = getattr(args, name, None)
        if val is not None:
            sc_over[key] = val
    if sc_over:
        scenario = dataclasses.replace(scenario, **sc_over)
    if getattr(args, "phi", None) is not None:
        agent_cfg = dataclasses.replace(agent_cfg, phi=args.phi, warmup=None)
    return scenario, agent_cfg


def cmd_run(args):
    scenario, agent_cfg = _load_or_default(args.config)
    scenario, agent_cfg = _apply_overrides(scenario, agent_cfg, args)
    os.makedirs(args.out_dir, exist_ok=True)
    result = experiment.run_policy_experiment(
        scenario, args.policy, agent_cfg,
        weights_path=args.load_weights, save_weights_path=args.save_weights)
    out_csv = os.path.join(args.out_dir, _csv_name(args.policy, scenario.switching_cost))
    experiment.write_experiment_csv(result, out_csv)
    experiment.write_summary_csv(
        [(args.policy, scenario.switching_cost,
          result.converged_rate, result.switching_rate)],
        os.path.join(args.out_dir, "summary.csv"))
    print(f"{args.policy}: converged_rate={result.converged_rate:.1f} bits/frame "
          f"switching_rate={result.switching_rate:.4f} -> {out_csv}")
    return 0


def cmd_sweep(args):
    scenario, agent_cfg = _load_or_default(args.config)
    scenario, agent_cfg = _apply_overrides(scenario, agent_cfg, args)
    os.makedirs(args.out_dir, exist_ok=True)
    # --costs values are in kbits/frame (plot-axis units); rewards are in bits
    costs_bits = [1000.0 * float(c) for c in args.costs.split(",")]
    policies = args.policies.split(",")
    results = experiment.sweep_switching_cost(scenario, costs_bits, policies, agent_cfg)
    rows = []
    for (policy, cost), res in results.items():
        experiment.write_experiment_csv(
            res, os.path.join(args.out_dir, _csv_name(policy, cost / 1000.0)))
        rows.append((policy, cost, res.converged_rate, res.switching_rate))
        print(f"{policy} c={cost:g}: converged_rate={res.converged_rate:.1f} "
              f"switching_rate={res.switching_rate:.4f}")
    experiment.write_summary_csv(rows, os.path.join(args.out_dir, "summary.csv"))
    return 0


def _check(name, ok, detail=""):
    print(f"{'PASS' if ok else 'FAIL'} {name}{' ' + detail if detail else ''}")
    return ok


def cmd_selftest(args):
    ok = True
    rng = np.random.default_rng(7)

    # Gaussian tail function against the standard-library erfc
    xs = np.linspace(-8, 37, 1200)
    rel = max(abs(q_function(x) - 0.5 * math.erfc(x / math.sqrt(2)))
              / max(0.5 * math.erfc(x / math.sqrt(2)), 1e-300) for x in xs)
    ok &= _check("q_function vs libm erfc", rel < 1e-10, f"max_rel={rel:.2e}")

    # Packet error rate against per-symbol Monte Carlo
    mc_ok = True
    for mcs, gamma in [(DEFAULT_MCS_TABLE[0], 3.0), (DEFAULT_MCS_TABLE[2], 22.3),
                       (DEFAULT_MCS_TABLE[3], 80.0)]:
        p_sym = ser(mcs, gamma)
        fails = (rng.binomial(1000, p_sym, size=100_000) > 0).mean()
        p = per(mcs, gamma, 1000)
        sigma = math.sqrt(max(p * (1 - p), 1e-12) / 100_000)
        mc_ok &= abs(fails - p) <= 3 * sigma
    ok &= _check("packet error rate vs Monte Carlo", mc_ok)

    # Fading stationarity and correlation
    fp = initial_fading(0.99, rng)
    hs = np.empty(100_000, dtype=complex)
    for i in range(len(hs)):
        hs[i] = fp.h
        fp = fading_step(fp, rng)
    power = np.mean(np.abs(hs) ** 2)
    lag1 = np.corrcoef(np.real(hs[:-1]), np.real(hs[1:]))[0, 1]
    ok &= _check("fading E|h|^2", abs(power - 1.0) < 0.02, f"{power:.4f}")
    ok &= _check("fading lag-1 autocorrelation", abs(lag1 - 0.99) < 0.02, f"{lag1:.4f}")

    # Backprop gradients against finite differences
    g_ok = True
    for seed in range(5):
        r = np.random.default_rng(seed)
        net = QNetwork((3, 6, 6, 4), rng=r)
        batch = [(r.standard_normal(3), int(r.integers(1, 5)),
                  float(r.standard_normal()), r.standard_normal(3))
                 for _ in range(3)]
        g_ok &= gradient_check(net, batch) < 1e-4
    ok &= _check("gradient check", g_ok)

    # Bit-reproducibility of a short learning run
    scenario = experiment.quasi_static_scenario(frames=600, trials=1)
    a = experiment.run_trial(scenario, "dqn", seed=5)
    b = experiment.run_trial(scenario, "dqn", seed=5)
    ok &= _check("deterministic trial", np.array_equal(a.action, b.action)
                 and np.array_equal(a.reward, b.reward))

    print("selftest:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="amcsim",
        description="Frame-level MCS selection simulator (DQN vs oracle/SNR/UCB)")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log per-1000-frame progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one policy on one scenario")
    p_run.add_argument("--config", help="key = value scenario/agent config file")
    p_run.add_argument("--policy", required=True, choices=experiment.POLICIES)
    p_run.add_argument("--trials", type=int)
    p_run.add_argument("--frames", type=int)
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--phi", type=int, help="history length in the DQN state")
    p_run.add_argument("--switch-cost", type=float, dest="switch_cost",
                       help="switching cost in bits/frame")
    p_run.add_argument("--out-dir", default="results")
    p_run.add_argument("--save-weights", help="save the first trial's trained net")
    p_run.add_argument("--load-weights", help="initialize the DQN from a weight file")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="switching-cost sweep")
    p_sweep.add_argument("--config")
    p_sweep.add_argument("--costs", default="0,0.5,1,1.5,2,2.5,3,3.5,4,4.5,5,5.5,6",
                         help="comma-separated switching costs in kbits/frame")
    p_sweep.add_argument("--policies", default="dqn,oracle,snr")
    p_sweep.add_argument("--trials", type=int)
    p_sweep.add_argument("--frames", type=int)
    p_sweep.add_argument("--seed", type=int)
    p_sweep.add_argument("--phi", type=int)
    p_sweep.add_argument("--out-dir", default="results")
    p_sweep.set_defaults(func=cmd_sweep)

    p_self = sub.add_parser("selftest", help="quick invariant checks")
    p_self.set_defaults(func=cmd_selftest)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(asctime)s %(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
