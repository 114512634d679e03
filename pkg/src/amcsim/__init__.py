"""Frame-level adaptive modulation simulator with a DQN link-adaptation agent."""

from .agent import AgentConfig, DqnAgent, EpsilonSchedule, Experience, ReplayMemory
from .baselines import UcbState, oracle_select, snr_select, ucb_select, ucb_update
from .envsim import Environment, FadingProcess, FrameOutcome, ScenarioConfig
from .experiment import (ExperimentResult, TrialSeries, dynamic_scenario,
                         load_config, moving_average, quasi_static_scenario,
                         run_experiment, run_policy_experiment, run_trial,
                         sweep_switching_cost)
from .linkmath import (DEFAULT_MCS_TABLE, LinkParams, McsSpec, optimal_mcs, per,
                       q_function, rate, ser)
from .neuralnet import QNetwork, RmsProp, gradient_check, load_weights, save_weights, sync_target, train_batch

__all__ = [
    "AgentConfig", "DqnAgent", "EpsilonSchedule", "Experience", "ReplayMemory",
    "UcbState", "oracle_select", "snr_select", "ucb_select", "ucb_update",
    "Environment", "FadingProcess", "FrameOutcome", "ScenarioConfig",
    "ExperimentResult", "TrialSeries", "dynamic_scenario", "load_config",
    "moving_average", "quasi_static_scenario", "run_experiment",
    "run_policy_experiment", "run_trial", "sweep_switching_cost",
    "DEFAULT_MCS_TABLE", "LinkParams", "McsSpec", "optimal_mcs", "per",
    "q_function", "rate", "ser",
    "QNetwork", "RmsProp", "gradient_check", "load_weights", "save_weights",
    "sync_target", "train_batch",
]
