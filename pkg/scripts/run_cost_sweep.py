#!/usr/bin/env python3
"""Switching-cost sweep on the quasi-static scenario.

Sweeps c from 0 to 6 kbits/frame in 0.5 kbit steps for DQN, oracle and
SNR-based, and reports (converged rate, switching rate) per point.  The
oracle and SNR-based rows come out constant: neither policy reacts to c.
"""

import argparse
import os
import sys

from amcsim import experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results/cost_sweep")
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--frames", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--costs", default="0,0.5,1,1.5,2,2.5,3,3.5,4,4.5,5,5.5,6",
                    help="comma-separated costs in kbits/frame")
    ap.add_argument("--policies", default="dqn,oracle,snr")
    args = ap.parse_args()

    scenario = experiment.quasi_static_scenario(
        trials=args.trials, frames=args.frames, seed=args.seed)
    costs_bits = [1000.0 * float(c) for c in args.costs.split(",")]
    os.makedirs(args.out_dir, exist_ok=True)
    results = experiment.sweep_switching_cost(
        scenario, costs_bits, policies=args.policies.split(","))
    rows = []
    for (policy, cost), res in sorted(results.items()):
        rows.append((policy, cost, res.converged_rate, res.switching_rate))
        print(f"{policy:>7} c={cost / 1000.0:4.1f}k: "
              f"converged {res.converged_rate:7.1f} bits/frame, "
              f"switching rate {res.switching_rate:.4f}")
    experiment.write_summary_csv(rows, os.path.join(args.out_dir, "summary.csv"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
