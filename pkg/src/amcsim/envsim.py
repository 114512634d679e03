"""Stochastic frame-level environment.

Per-frame evolution of the primary and interferer fading coefficients
(first-order Gauss-Markov / Jakes-style AR(1) process), random interferer
activity driven by per-transmitter miss-detection probabilities, the
SNR / SINR / bit-average-SINR chain, and the packet success and reward draw.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .linkmath import DEFAULT_MCS_TABLE, LinkParams, per


@dataclass
class FadingProcess:
    """AR(1) complex fading state: h(t) = rho h(t-1) + delta, delta ~ CN(0, 1-rho^2).

    `h` may be a scalar or an array (one entry per channel).
    """

    h: object
    rho: float


def initial_fading(rho, rng, n=None):
    """Fresh CN(0,1) fading state; `n` channels, or a scalar when n is None."""
    re = rng.standard_normal(size=n)
    im = rng.standard_normal(size=n)
    return FadingProcess(h=(re + 1j * im) / math.sqrt(2.0), rho=rho)


def fading_step(fp, rng):
    """One frame of the Gauss-Markov recursion; stationary with E|h|^2 = 1."""
    if not 0.0 <= fp.rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {fp.rho}")
    shape = np.shape(fp.h)
    scale = math.sqrt((1.0 - fp.rho**2) / 2.0)
    delta = scale * (rng.standard_normal(size=shape or None)
                     + 1j * rng.standard_normal(size=shape or None))
    return FadingProcess(h=fp.rho * fp.h + delta, rho=fp.rho)


@dataclass
class ScenarioConfig:
    """Everything that defines one simulated scenario.

    Powers are collapsed into the two ratios the link actually sees: the
    average SNR of the primary signal and the per-interferer average INR,
    both in dB over unit noise power.
    """

    avg_snr_db: float = 20.0
    inr_db: tuple = (5.0, 5.0)
    miss_prob: tuple = (1.0, 1.0)
    rho: float = 0.99
    symbols_per_frame: int = 1000
    sensing_fraction: float = 0.1
    switching_cost: float = 0.0
    frames: int = 20000
    trials: int = 20
    seed: int = 1

    def __post_init__(self):
        self.inr_db = tuple(self.inr_db)
        self.miss_prob = tuple(self.miss_prob)
        if len(self.inr_db) != len(self.miss_prob):
            raise ValueError("inr_db and miss_prob must have the same length")
        if any(not 0.0 <= a <= 1.0 for a in self.miss_prob):
            raise ValueError("miss probabilities must lie in [0, 1]")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")
        if self.switching_cost < 0.0:
            raise ValueError("switching_cost must be >= 0")
        if self.frames < 1 or self.trials < 1:
            raise ValueError("frames and trials must be >= 1")

    @property
    def num_interferers(self):
        return len(self.inr_db)

    def link_params(self):
        return LinkParams(self.symbols_per_frame, self.sensing_fraction)


@dataclass
class FrameOutcome:
    """Record of one simulated frame."""

    gamma0: float
    gamma_bar: float
    active_set: tuple
    action: int
    success: bool
    reward: float
    switched: bool


def sample_active_set(config, rng):
    """Interferer indices (1-based) transmitting this frame; each appears
    independently with its miss-detection probability."""
    draws = rng.random(config.num_interferers)
    return tuple(k + 1 for k in range(config.num_interferers)
                 if draws[k] < config.miss_prob[k])


def compute_gammas(h, active_set, config, link=None):
    """(gamma0, gamma1, gamma_bar) from the fading vector `h`.

    h[0] is the primary channel, h[k] interferer k.  gamma0 is the clean SNR,
    gamma1 the SINR under the active interferers, gamma_bar their time blend
    weighted by the sensing fraction.
    """
    if link is None:
        link = config.link_params()
    snr_lin = 10.0 ** (config.avg_snr_db / 10.0)
    gamma0 = snr_lin * abs(h[0]) ** 2
    denom = 1.0
    for k in active_set:
        inr_lin = 10.0 ** (config.inr_db[k - 1] / 10.0)
        denom += inr_lin * abs(h[k]) ** 2
    gamma1 = gamma0 / denom
    w0 = link.sensing_fraction
    gamma_bar = w0 * gamma0 + (1.0 - w0) * gamma1
    return gamma0, gamma1, gamma_bar


class Environment:
    """One trial's worth of frames, advanced one frame at a time.

    Uses three named RNG streams (fading, activity, packet) spawned from a
    single seed sequence so that e.g. the packet draws do not perturb the
    fading trajectory across policies.
    """

    def __init__(self, config, seed_seq, table=DEFAULT_MCS_TABLE):
        self.config = config
        self.table = table
        self.link = config.link_params()
        fading_ss, activity_ss, packet_ss = np.random.SeedSequence(seed_seq).spawn(3) \
            if isinstance(seed_seq, int) else seed_seq.spawn(3)
        self._rng_fading = np.random.default_rng(fading_ss)
        self._rng_activity = np.random.default_rng(activity_ss)
        self._rng_packet = np.random.default_rng(packet_ss)
        # precomputed linear ratios
        self._snr_lin = 10.0 ** (config.avg_snr_db / 10.0)
        self._inr_lin = np.array([10.0 ** (v / 10.0) for v in config.inr_db])
        self.fading = initial_fading(config.rho, self._rng_fading,
                                     n=1 + config.num_interferers)
        self.t = 0
        self.gamma0 = None
        self.gamma1 = None
        self.gamma_bar = None
        self.active_set = None

    def advance(self):
        """Start the next frame: step fading (after frame 1), draw interferer
        activity, and compute this frame's gammas.  Returns (gamma0, gamma_bar)."""
        self.t += 1
        if self.t > 1:
            self.fading = fading_step(self.fading, self._rng_fading)
        cfg = self.config
        h = self.fading.h
        draws = self._rng_activity.random(cfg.num_interferers)
        active = tuple(k + 1 for k in range(cfg.num_interferers)
                       if draws[k] < cfg.miss_prob[k])
        gamma0 = self._snr_lin * (h[0].real ** 2 + h[0].imag ** 2)
        denom = 1.0
        for k in active:
            hk = h[k]
            denom += self._inr_lin[k - 1] * (hk.real ** 2 + hk.imag ** 2)
        gamma1 = gamma0 / denom
        w0 = self.link.sensing_fraction
        self.gamma0 = gamma0
        self.gamma1 = gamma1
        self.gamma_bar = w0 * gamma0 + (1.0 - w0) * gamma1
        self.active_set = active
        return gamma0, self.gamma_bar

    def frame_step(self, action, prev_action):
        """Execute `action` (an MCS index) for the current frame.

        Success is a Bernoulli draw from the analytic packet success
        probability at the realized bit-average SINR; the reward charges the
        switching cost whenever action != prev_action.
        """
        mcs = None
        for m in self.table:
            if m.index == action:
                mcs = m
                break
        if mcs is None:
            raise ValueError(f"invalid MCS index {action}")
        n = self.link.symbols_per_frame
        p_ok = 1.0 - per(mcs, self.gamma_bar, n)
        success = self._rng_packet.random() < p_ok
        switched = action != prev_action
        c = self.config.switching_cost
        if success:
            reward = mcs.bits_per_symbol * n - (c if switched else 0.0)
        else:
            reward = -c if switched else 0.0
        return FrameOutcome(
            gamma0=self.gamma0,
            gamma_bar=self.gamma_bar,
            active_set=self.active_set,
            action=action,
            success=success,
            reward=reward,
            switched=switched,
        )
