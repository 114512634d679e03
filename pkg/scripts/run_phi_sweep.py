#!/usr/bin/env python3
"""History-length sensitivity: DQN converged rate for phi in {1, 5, 10}.

On the quasi-static scenario the three rates land close together; on the
dynamic scenario longer histories only add noise to the state and the rate
drops with phi.
"""

import argparse
import os
import sys

from amcsim import experiment
from amcsim.agent import AgentConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results/phi_sweep")
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--frames", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--phis", default="1,5,10")
    args = ap.parse_args()

    scenarios = {
        "quasi_static": experiment.quasi_static_scenario(
            trials=args.trials, frames=args.frames, seed=args.seed),
        "dynamic": experiment.dynamic_scenario(
            trials=args.trials, frames=args.frames, seed=args.seed),
    }
    os.makedirs(args.out_dir, exist_ok=True)
    for name, scenario in scenarios.items():
        rows = []
        for phi in (int(p) for p in args.phis.split(",")):
            res = experiment.run_policy_experiment(
                scenario, "dqn", AgentConfig(phi=phi))
            experiment.write_experiment_csv(
                res, os.path.join(args.out_dir, f"{name}_phi{phi}.csv"))
            rows.append((f"dqn_phi{phi}", 0.0,
                         res.converged_rate, res.switching_rate))
            print(f"{name} phi={phi:2d}: converged {res.converged_rate:7.1f} "
                  f"bits/frame, switching rate {res.switching_rate:.4f}")
        experiment.write_summary_csv(
            rows, os.path.join(args.out_dir, f"{name}_summary.csv"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
