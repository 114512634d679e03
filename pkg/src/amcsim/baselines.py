"""Comparison policies: genie-aided optimum, SNR-only selection, and UCB.

The oracle is deliberately non-causal (it is handed the frame's true
bit-average SINR) and upper-bounds every other policy.  The SNR policy runs
the same rate maximization on the interference-free SNR.  UCB treats the MCS
levels as bandit arms with the frame reward as payoff.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .linkmath import DEFAULT_MCS_TABLE, optimal_mcs


def oracle_select(gamma_bar_true, n_symbols, table=DEFAULT_MCS_TABLE):
    """Rate-maximizing MCS given the true bit-average SINR."""
    return optimal_mcs(gamma_bar_true, n_symbols, table)


def snr_select(gamma0, n_symbols, table=DEFAULT_MCS_TABLE):
    """Rate-maximizing MCS pretending the clean SNR holds for the whole frame."""
    return optimal_mcs(gamma0, n_symbols, table)


@dataclass
class UcbState:
    """Running per-arm mean rewards and play counts; `t` counts played frames."""

    n_arms: int
    means: np.ndarray = field(default=None)
    counts: np.ndarray = field(default=None)
    t: int = 0

    def __post_init__(self):
        if self.means is None:
            self.means = np.zeros(self.n_arms)
        if self.counts is None:
            self.counts = np.zeros(self.n_arms, dtype=int)


def ucb_select(state, n_arms=None):
    """Arm (1-based) with the highest mean + sqrt(2 ln t / count) bonus.

    Each arm is played once first, lowest index first, so the bonus is never
    evaluated at a zero count; ties go to the lowest index.
    """
    if n_arms is None:
        n_arms = state.n_arms
    for m in range(n_arms):
        if state.counts[m] == 0:
            return m + 1
    t_now = state.t + 1
    bonus = np.sqrt(2.0 * math.log(t_now) / state.counts)
    return int(np.argmax(state.means + bonus)) + 1


def ucb_update(state, chosen, reward):
    """Incremental mean update for the arm just played."""
    m = chosen - 1
    state.counts[m] += 1
    state.means[m] += (reward - state.means[m]) / state.counts[m]
    state.t += 1
    return state
