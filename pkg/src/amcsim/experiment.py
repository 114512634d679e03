"""Experiment orchestration: trials, trial averaging, metrics, CSV output.

Metric conventions follow the evaluation protocol used throughout:
per-frame transmission rate (successful bits, excluding any switching cost),
a trailing 200-frame moving average, pointwise averaging across trials, and
converged statistics over the last 5000 frames.
"""

import csv
import dataclasses
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .agent import AgentConfig, DqnAgent, Experience
from .baselines import UcbState, oracle_select, snr_select, ucb_select, ucb_update
from .envsim import Environment, ScenarioConfig
from .linkmath import DEFAULT_MCS_TABLE
from .neuralnet import load_weights, save_weights, sync_target

log = logging.getLogger("amcsim")

POLICIES = ("dqn", "oracle", "snr", "ucb", "random")
MOVING_WINDOW = 200
CONVERGED_TAIL = 5000

CSV_COLUMNS = ("frame", "reward", "rate", "moving_avg", "action", "switched",
               "gamma0_db", "gamma_bar_db")


def moving_average(x, window=MOVING_WINDOW):
    """Trailing mean over the previous `window` frames, truncated at the start."""
    if window < 1:
        raise ValueError("window must be >= 1")
    x = np.asarray(x, dtype=float)
    c = np.cumsum(x)
    out = np.empty_like(x)
    head = min(window, len(x))
    out[:head] = c[:head] / np.arange(1, head + 1)
    if len(x) > window:
        out[window:] = (c[window:] - c[:-window]) / window
    return out


@dataclass
class TrialSeries:
    """Per-frame logs of a single trial plus derived metrics."""

    reward: np.ndarray
    rate: np.ndarray
    moving_avg: np.ndarray
    action: np.ndarray
    switched: np.ndarray
    gamma0_db: np.ndarray
    gamma_bar_db: np.ndarray

    @property
    def frames(self):
        return len(self.rate)

    @property
    def converged_rate(self):
        tail = min(CONVERGED_TAIL, self.frames)
        return float(np.mean(self.moving_avg[-tail:]))

    @property
    def switching_rate(self):
        tail = min(CONVERGED_TAIL, self.frames)
        return float(np.mean(self.switched[-tail:]))


def run_trial(scenario, policy, seed, agent_cfg=None, table=DEFAULT_MCS_TABLE,
              weights_path=None, return_agent=False):
    """Simulate one trial of `scenario.frames` frames under `policy`.

    Frames run strictly sequentially: advance fading, draw interferer
    activity, compute the gammas, let the policy act (the oracle also sees
    the true bit-average SINR), draw the packet outcome, then let learning
    policies observe and train.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    if agent_cfg is None:
        agent_cfg = AgentConfig()
    ss = np.random.SeedSequence(seed)
    env_ss, policy_ss = ss.spawn(2)
    env = Environment(scenario, env_ss, table)
    rng_policy = np.random.default_rng(policy_ss)

    frames = scenario.frames
    n = scenario.symbols_per_frame
    n_actions = len(table)
    bits = np.zeros(max(m.index for m in table) + 1)
    for m in table:
        bits[m.index] = m.bits_per_symbol * n

    reward_arr = np.empty(frames)
    rate_arr = np.empty(frames)
    action_arr = np.empty(frames, dtype=int)
    switched_arr = np.empty(frames)
    g0_db = np.empty(frames)
    gbar_db = np.empty(frames)

    agent = None
    ucb = None
    pending = None  # (state, action, normalized reward) awaiting next state
    if policy == "dqn":
        reward_scale = float(bits.max())
        agent = DqnAgent(agent_cfg, n_actions, reward_scale, rng_policy)
        if weights_path is not None:
            net = load_weights(weights_path, expected_input=agent_cfg.input_size,
                               expected_output=n_actions)
            agent.net = net
            sync_target(agent.net, agent.target_net)
    elif policy == "ucb":
        ucb = UcbState(n_actions)

    prev_action = None
    for t in range(1, frames + 1):
        gamma0, gamma_bar = env.advance()
        if policy == "oracle":
            action = oracle_select(gamma_bar, n, table)
        elif policy == "snr":
            action = snr_select(gamma0, n, table)
        elif policy == "random":
            action = int(rng_policy.integers(1, n_actions + 1))
        elif policy == "ucb":
            action = ucb_select(ucb)
        else:
            state = agent.start_frame(gamma0)
            if pending is not None:
                agent.observe(Experience(pending[0], pending[1], pending[2], state))
            action = agent.select_action(state)
            agent.step_epsilon()

        out = env.frame_step(action, prev_action if prev_action is not None else action)

        if policy == "dqn":
            agent.record_frame(action, out.reward, gamma0, gamma_bar)
            pending = (state, action, agent.normalize_reward(out.reward))
            agent.learn()
        elif policy == "ucb":
            ucb_update(ucb, action, out.reward)

        i = t - 1
        reward_arr[i] = out.reward
        rate_arr[i] = bits[action] if out.success else 0.0
        action_arr[i] = action
        switched_arr[i] = 1.0 if out.switched else 0.0
        g0_db[i] = 10.0 * np.log10(max(gamma0, 1e-300))
        gbar_db[i] = 10.0 * np.log10(max(gamma_bar, 1e-300))
        prev_action = action
        if t % 1000 == 0:
            log.debug("policy=%s seed=%d frame=%d ma=%.1f", policy, seed, t,
                      moving_average(rate_arr[:t])[-1])

    series = TrialSeries(
        reward=reward_arr,
        rate=rate_arr,
        moving_avg=moving_average(rate_arr),
        action=action_arr,
        switched=switched_arr,
        gamma0_db=g0_db,
        gamma_bar_db=gbar_db,
    )
    if return_agent:
        return series, agent
    return series


@dataclass
class ExperimentResult:
    """Trial-averaged curves and converged metrics for one (policy, scenario)."""

    policy: str
    switching_cost: float
    frames: int
    trials: int
    avg_reward: np.ndarray
    avg_rate: np.ndarray
    avg_moving: np.ndarray
    avg_action: np.ndarray
    avg_switched: np.ndarray
    avg_gamma0_db: np.ndarray
    avg_gamma_bar_db: np.ndarray
    per_trial_converged: tuple

    @property
    def converged_rate(self):
        tail = min(CONVERGED_TAIL, self.frames)
        return float(np.mean(self.avg_moving[-tail:]))

    @property
    def switching_rate(self):
        tail = min(CONVERGED_TAIL, self.frames)
        return float(np.mean(self.avg_switched[-tail:]))

    def final_rate(self, tail=2000):
        """Mean trial-averaged raw rate over the last `tail` frames."""
        tail = min(tail, self.frames)
        return float(np.mean(self.avg_rate[-tail:]))


def _worker_count():
    raw = os.environ.get("AMCSIM_WORKERS", "")
    if raw.strip():
        return max(1, int(raw))
    return os.cpu_count() or 1


def _trial_job(args):
    scenario, policy, seed, agent_cfg, weights_path = args
    return run_trial(scenario, policy, seed, agent_cfg, weights_path=weights_path)


def run_policy_experiment(scenario, policy, agent_cfg=None, trials=None,
                          weights_path=None, save_weights_path=None):
    """Run `trials` independent trials (seed = scenario.seed + index) and
    average the per-trial moving averages pointwise."""
    if trials is None:
        trials = scenario.trials
    if trials < 1:
        raise ValueError("trials must be >= 1")
    seeds = [scenario.seed + i for i in range(trials)]
    jobs = [(scenario, policy, s, agent_cfg, weights_path) for s in seeds]

    series = [None] * trials
    start = 0
    if save_weights_path is not None and policy == "dqn":
        series[0], agent = run_trial(scenario, policy, seeds[0], agent_cfg,
                                     weights_path=weights_path, return_agent=True)
        save_weights(agent.net, save_weights_path)
        start = 1

    remaining = jobs[start:]
    workers = _worker_count()
    if workers > 1 and len(remaining) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial_job, remaining))
    else:
        results = [_trial_job(j) for j in remaining]
    series[start:] = results

    def avg(attr):
        return np.mean([getattr(s, attr) for s in series], axis=0)

    return ExperimentResult(
        policy=policy,
        switching_cost=scenario.switching_cost,
        frames=scenario.frames,
        trials=trials,
        avg_reward=avg("reward"),
        avg_rate=avg("rate"),
        avg_moving=avg("moving_avg"),
        avg_action=avg("action"),
        avg_switched=avg("switched"),
        avg_gamma0_db=avg("gamma0_db"),
        avg_gamma_bar_db=avg("gamma_bar_db"),
        per_trial_converged=tuple(s.converged_rate for s in series),
    )


def run_experiment(scenario, policies, agent_cfg=None, trials=None):
    """Run several policies on the same scenario; dict keyed by policy id."""
    return {p: run_policy_experiment(scenario, p, agent_cfg, trials)
            for p in policies}


def sweep_switching_cost(scenario, costs_bits, policies=("dqn", "oracle", "snr"),
                         agent_cfg=None, trials=None):
    """Rerun the experiment for each switching cost (in bits/frame).

    Returns {(policy, cost): ExperimentResult}.  The oracle and SNR policies
    ignore the cost by construction, so their rows come out identical.
    """
    if any(c < 0 for c in costs_bits):
        raise ValueError("switching costs must be >= 0")
    out = {}
    for c in costs_bits:
        sc = dataclasses.replace(scenario, switching_cost=float(c))
        for p in policies:
            log.info("sweep: policy=%s cost=%g", p, c)
            out[(p, float(c))] = run_policy_experiment(sc, p, agent_cfg, trials)
    return out


def write_experiment_csv(result, path):
    """One row per frame; floats via repr() so parsing is bit-exact."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CSV_COLUMNS)
        for i in range(result.frames):
            w.writerow([
                i + 1,
                repr(float(result.avg_reward[i])),
                repr(float(result.avg_rate[i])),
                repr(float(result.avg_moving[i])),
                repr(float(result.avg_action[i])),
                repr(float(result.avg_switched[i])),
                repr(float(result.avg_gamma0_db[i])),
                repr(float(result.avg_gamma_bar_db[i])),
            ])


def read_experiment_csv(path):
    """Parse a CSV written by write_experiment_csv back into arrays."""
    with open(path, newline="") as f:
        r = csv.reader(f)
        header = next(r)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected CSV header {header}")
        rows = list(r)
    data = np.array([[float(v) for v in row] for row in rows])
    return {col: data[:, j] for j, col in enumerate(CSV_COLUMNS)}


def converged_from_csv(path):
    """(converged_rate, switching_rate) recomputed from an emitted CSV."""
    data = read_experiment_csv(path)
    tail = min(CONVERGED_TAIL, len(data["moving_avg"]))
    return (float(np.mean(data["moving_avg"][-tail:])),
            float(np.mean(data["switched"][-tail:])))


def write_summary_csv(rows, path):
    """Rows of (policy, switching_cost, converged_rate, switching_rate)."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(("policy", "switching_cost", "converged_rate", "switching_rate"))
        for policy, cost, conv, sw in rows:
            w.writerow([policy, repr(float(cost)), repr(float(conv)), repr(float(sw))])


# Scenario presets used by the shipped config files and the test suite.

def quasi_static_scenario(**overrides):
    """Two always-on interferers, slowly varying fading (rho = 0.99)."""
    base = dict(avg_snr_db=20.0, inr_db=(5.0, 5.0), miss_prob=(1.0, 1.0),
                rho=0.99, symbols_per_frame=1000, sensing_fraction=0.1,
                switching_cost=0.0, frames=20000, trials=20, seed=1)
    base.update(overrides)
    return ScenarioConfig(**base)


def dynamic_scenario(**overrides):
    """Three interferers (one intermittent), i.i.d. fading (rho = 0)."""
    base = dict(avg_snr_db=20.0, inr_db=(5.0, 5.0, 5.0), miss_prob=(1.0, 1.0, 0.5),
                rho=0.0, symbols_per_frame=1000, sensing_fraction=0.1,
                switching_cost=0.0, frames=20000, trials=20, seed=1)
    base.update(overrides)
    return ScenarioConfig(**base)


_SCENARIO_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
_AGENT_FIELDS = {f.name: f for f in dataclasses.fields(AgentConfig)}
_LIST_KEYS = {"inr_db", "miss_prob"}
_INT_KEYS = {"symbols_per_frame", "frames", "trials", "seed", "phi", "batch_size",
             "memory_capacity", "target_sync_period", "warmup", "hidden_size"}


def load_config(path):
    """Parse a key = value config file into (ScenarioConfig, AgentConfig).

    Lines starting with '#' and blank lines are ignored; list values are
    comma separated.  Keys must be fields of one of the two configs.
    """
    scenario_kv = {}
    agent_kv = {}
    with open(path) as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            if key in _LIST_KEYS:
                parsed = tuple(float(v) for v in val.split(",")) if val else ()
            elif key in _INT_KEYS:
                parsed = int(val)
            else:
                parsed = float(val)
            if key in _SCENARIO_FIELDS:
                scenario_kv[key] = parsed
            elif key in _AGENT_FIELDS:
                agent_kv[key] = parsed
            else:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
    return ScenarioConfig(**scenario_kv), AgentConfig(**agent_kv)
