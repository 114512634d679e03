"""DQN agent: state assembly, epsilon-greedy selection, FIFO replay, training.

Per frame the agent (a) builds the state vector from the last Phi frame
records plus the current clean SNR, (b) picks an MCS epsilon-greedily
(uniformly at random during the warmup frames), (c) stores the completed
experience, and (d) takes one batched TD step, syncing the target network
every `target_sync_period` frames.
"""

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .neuralnet import QNetwork, RmsProp, sync_target, train_batch

# dB-derived state entries are divided by this, with a floor at -DB_NORM dB
DB_NORM = 40.0
PAD_DB_SENTINEL = -1.0


class Experience(NamedTuple):
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray


@dataclass(frozen=True)
class EpsilonSchedule:
    eps: float = 0.3
    eps_min: float = 0.005
    decay: float = 0.0001


def epsilon_step(sched):
    """eps(t+1) = max(eps_min, (1 - decay) * eps(t))."""
    return replace(sched, eps=max(sched.eps_min, (1.0 - sched.decay) * sched.eps))


@dataclass
class AgentConfig:
    phi: int = 1
    batch_size: int = 32
    memory_capacity: int = 500
    target_sync_period: int = 100
    discount: float = 0.5
    warmup: int = None
    eps_start: float = 0.3
    eps_min: float = 0.005
    eps_decay: float = 0.0001
    hidden_size: int = 100
    learning_rate: float = 0.01

    def __post_init__(self):
        if self.warmup is None:
            self.warmup = self.batch_size
        if self.phi < 1:
            raise ValueError("phi must be >= 1")
        if self.batch_size > self.memory_capacity:
            raise ValueError("batch_size must not exceed memory_capacity")
        if self.target_sync_period < 1:
            raise ValueError("target_sync_period must be >= 1")
        if not 0.0 <= self.discount <= 1.0:
            raise ValueError("discount must lie in [0, 1]")

    @property
    def input_size(self):
        return 4 * self.phi + 1

    def layer_sizes(self, n_actions):
        return (self.input_size, self.hidden_size, self.hidden_size, n_actions)


class ReplayMemory:
    """Fixed-capacity ring buffer with FIFO eviction."""

    def __init__(self, capacity):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._buf = []
        self._pos = 0

    def __len__(self):
        return len(self._buf)

    def append(self, item):
        if len(self._buf) < self.capacity:
            self._buf.append(item)
        else:
            self._buf[self._pos] = item
            self._pos = (self._pos + 1) % self.capacity

    def sample(self, rng, k):
        """k distinct experiences, uniformly without replacement."""
        idx = rng.choice(len(self._buf), size=k, replace=False)
        return [self._buf[i] for i in idx]

    def items(self):
        return list(self._buf)


def norm_db(gamma_lin):
    """Linear power ratio -> dB / DB_NORM, floored at -DB_NORM dB."""
    if gamma_lin <= 1e-4:  # 1e-4 linear == -40 dB floor
        return -1.0
    return 10.0 * math.log10(gamma_lin) / DB_NORM


def build_state(history, gamma0_now, phi, n_actions, reward_scale):
    """Assemble the 4*phi+1 state vector.

    `history` holds the last `phi` frame records, oldest first; each entry is
    either None (pre-start pseudo-frame) or a tuple
    (action, reward_bits, gamma0_lin, gamma_bar_lin).  Normalization: action
    to (m-1)/(M-1), reward to reward/reward_scale, gammas to dB/40 with the
    pseudo-frames carrying the -1 sentinel in the dB slots.
    """
    if len(history) != phi:
        raise ValueError(f"history must hold exactly {phi} entries, got {len(history)}")
    vec = np.empty(4 * phi + 1)
    i = 0
    for entry in history:
        if entry is None:
            vec[i:i + 2] = 0.0
            vec[i + 2:i + 4] = PAD_DB_SENTINEL
        else:
            action, reward, g0, gbar = entry
            vec[i] = (action - 1) / (n_actions - 1)
            vec[i + 1] = reward / reward_scale
            vec[i + 2] = norm_db(g0)
            vec[i + 3] = norm_db(gbar)
        i += 4
    vec[i] = norm_db(gamma0_now)
    return vec


class DqnAgent:
    """Learned MCS-selection policy over `n_actions` discrete levels."""

    def __init__(self, config, n_actions, reward_scale, rng):
        self.config = config
        self.n_actions = n_actions
        self.reward_scale = reward_scale
        self.rng = rng
        sizes = config.layer_sizes(n_actions)
        self.net = QNetwork(sizes, rng=rng)
        self.target_net = QNetwork(sizes)
        sync_target(self.net, self.target_net)
        self.optimizer = RmsProp(learning_rate=config.learning_rate)
        self.memory = ReplayMemory(config.memory_capacity)
        self.eps = EpsilonSchedule(config.eps_start, config.eps_min, config.eps_decay)
        self.history = [None] * config.phi
        self.t = 0  # frames seen

    def build_state(self, gamma0_now):
        return build_state(self.history, gamma0_now, self.config.phi,
                           self.n_actions, self.reward_scale)

    def select_action(self, state):
        """Epsilon-greedy MCS index (1-based); pure exploration during warmup."""
        if self.t <= self.config.warmup or self.rng.random() < self.eps.eps:
            return int(self.rng.integers(1, self.n_actions + 1))
        q = self.net.forward(state)
        return int(np.argmax(q)) + 1  # argmax takes the lowest index on ties

    def start_frame(self, gamma0_now):
        """Advance the frame counter and return this frame's state vector."""
        self.t += 1
        return self.build_state(gamma0_now)

    def step_epsilon(self):
        self.eps = epsilon_step(self.eps)

    def record_frame(self, action, reward, gamma0, gamma_bar):
        """Push this frame's raw record into the Phi-frame history window."""
        self.history.pop(0)
        self.history.append((action, reward, gamma0, gamma_bar))

    def observe(self, experience):
        self.memory.append(experience)

    def learn(self):
        """One TD step on a sampled mini-batch; None if memory is still short.

        The target network is refreshed right after the update on every
        `target_sync_period`-th frame.
        """
        if len(self.memory) < self.config.batch_size:
            return None
        batch = self.memory.sample(self.rng, self.config.batch_size)
        loss = train_batch(self.net, self.target_net, batch,
                           self.config.discount, self.optimizer)
        if self.t % self.config.target_sync_period == 0:
            sync_target(self.net, self.target_net)
        return loss

    def normalize_reward(self, reward):
        return reward / self.reward_scale
