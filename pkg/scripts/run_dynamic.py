#!/usr/bin/env python3
"""Dynamic comparison: three interferers, one intermittent, i.i.d. fading.

The interesting outcome is the converged-rate ordering
oracle > DQN > UCB > SNR-based.
"""

import argparse
import os
import sys

from amcsim import experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results/dynamic")
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--frames", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--policies", default="dqn,oracle,snr,ucb,random")
    args = ap.parse_args()

    scenario = experiment.dynamic_scenario(
        trials=args.trials, frames=args.frames, seed=args.seed)
    os.makedirs(args.out_dir, exist_ok=True)
    rows = []
    for policy in args.policies.split(","):
        res = experiment.run_policy_experiment(scenario, policy)
        experiment.write_experiment_csv(
            res, os.path.join(args.out_dir, f"{policy}.csv"))
        rows.append((policy, 0.0, res.converged_rate, res.switching_rate))
        print(f"{policy:>7}: converged {res.converged_rate:7.1f} bits/frame, "
              f"switching rate {res.switching_rate:.4f}")
    experiment.write_summary_csv(rows, os.path.join(args.out_dir, "summary.csv"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
