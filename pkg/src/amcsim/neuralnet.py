"""Small dense ReLU network with explicit backprop and RMSProp.

This is the Q-function approximator: input is the assembled state vector,
output is one action value per MCS level.  The TD loss is
L = 1/(2Z) sum_e (y_e - Q(s_e, a_e))^2 with y computed from a separate
target network, and the gradient flows only through the selected action's
output of the trained network.
"""

from dataclasses import dataclass

import numpy as np


class QNetwork:
    """Fully connected net: affine + ReLU hidden layers, identity output."""

    def __init__(self, layer_sizes, rng=None):
        if len(layer_sizes) < 2:
            raise ValueError("need at least an input and an output layer")
        self.layer_sizes = tuple(int(s) for s in layer_sizes)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(self.layer_sizes, self.layer_sizes[1:]):
            if rng is None:
                w = np.zeros((fan_in, fan_out))
            else:
                limit = np.sqrt(6.0 / (fan_in + fan_out))
                w = rng.uniform(-limit, limit, size=(fan_in, fan_out))
            self.weights.append(w)
            self.biases.append(np.zeros(fan_out))

    @property
    def input_size(self):
        return self.layer_sizes[0]

    @property
    def output_size(self):
        return self.layer_sizes[-1]

    def forward(self, x):
        """Action values for a single state (1-d) or a batch (2-d)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        if x.shape[-1] != self.input_size:
            raise ValueError(
                f"input width {x.shape[-1]} != expected {self.input_size}")
        a = x if not single else x[None, :]
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            a = a @ w + b
            if i < last:
                np.maximum(a, 0.0, out=a)
        return a[0] if single else a

    def _forward_cached(self, x):
        """Forward pass keeping post-activation values for backprop."""
        acts = [x]
        a = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            a = a @ w + b
            if i < last:
                np.maximum(a, 0.0, out=a)
            acts.append(a)
        return acts

    def params(self):
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out


def sync_target(net, target_net):
    """theta^- <- theta (deep copy); later updates to `net` leave the target alone."""
    if net.layer_sizes != target_net.layer_sizes:
        raise ValueError("network architectures differ")
    target_net.weights = [w.copy() for w in net.weights]
    target_net.biases = [b.copy() for b in net.biases]


def td_loss_and_grads(net, states, actions, targets):
    """Loss 1/(2Z) sum (y - Q(s,a))^2 and its gradient w.r.t. every parameter.

    `actions` are 0-based output indices; `targets` are treated as constants.
    """
    z = len(states)
    acts = net._forward_cached(states)
    q = acts[-1]
    idx = np.arange(z)
    diff = targets - q[idx, actions]
    loss = float(diff @ diff) / (2.0 * z)
    dq = np.zeros_like(q)
    dq[idx, actions] = -diff / z
    grads = []
    delta = dq
    for i in range(len(net.weights) - 1, -1, -1):
        a_prev = acts[i]
        grads.append(delta.sum(axis=0))          # bias
        grads.append(a_prev.T @ delta)           # weight
        if i > 0:
            delta = delta @ net.weights[i].T
            delta[acts[i] <= 0.0] = 0.0          # ReLU gate (post-activation)
        # note: acts[i] for i>0 is the post-ReLU output, zero exactly where
        # the pre-activation was clipped, so the mask is equivalent.
    grads.reverse()  # now ordered W1, b1, W2, b2, ...
    return loss, grads


@dataclass
class RmsProp:
    """Per-parameter squared-gradient scaling; canonical decay/epsilon."""

    learning_rate: float = 0.01
    decay: float = 0.9
    epsilon: float = 1e-8

    def __post_init__(self):
        self._cache = None

    def step(self, params, grads):
        if self._cache is None:
            self._cache = [np.zeros_like(p) for p in params]
        for p, g, v in zip(params, grads, self._cache):
            v *= self.decay
            v += (1.0 - self.decay) * g * g
            p -= self.learning_rate * g / (np.sqrt(v) + self.epsilon)


def train_batch(net, target_net, batch, discount, optimizer):
    """One batched TD update; returns the pre-step loss.

    `batch` is a sequence of (state, action, reward, next_state) tuples with
    1-based actions (MCS indices).
    """
    if len(batch) == 0:
        raise ValueError("batch must not be empty")
    if net.layer_sizes != target_net.layer_sizes:
        raise ValueError("network architectures differ")
    states = np.stack([e[0] for e in batch])
    actions = np.fromiter((e[1] - 1 for e in batch), dtype=int, count=len(batch))
    rewards = np.fromiter((e[2] for e in batch), dtype=float, count=len(batch))
    next_states = np.stack([e[3] for e in batch])
    next_q = target_net.forward(next_states)
    targets = rewards + discount * next_q.max(axis=1)
    loss, grads = td_loss_and_grads(net, states, actions, targets)
    optimizer.step(net.params(), grads)
    return loss


def gradient_check(net, batch, discount=0.9, h=1e-5):
    """Max relative error between analytic and central-difference gradients.

    Intended for tiny nets and batches; the targets are computed once from
    the net itself and then held fixed, matching the stop-gradient in the
    TD loss.
    """
    states = np.stack([e[0] for e in batch])
    actions = np.fromiter((e[1] - 1 for e in batch), dtype=int, count=len(batch))
    rewards = np.fromiter((e[2] for e in batch), dtype=float, count=len(batch))
    next_states = np.stack([e[3] for e in batch])
    targets = rewards + discount * net.forward(next_states).max(axis=1)

    def loss_only():
        z = len(states)
        q = net.forward(states)
        diff = targets - q[np.arange(z), actions]
        return float(diff @ diff) / (2.0 * z)

    _, grads = td_loss_and_grads(net, states, actions, targets)
    max_rel = 0.0
    for p, g in zip(net.params(), grads):
        flat_p = p.reshape(-1)
        flat_g = g.reshape(-1)
        for i in range(flat_p.size):
            orig = flat_p[i]
            flat_p[i] = orig + h
            lp = loss_only()
            flat_p[i] = orig - h
            lm = loss_only()
            flat_p[i] = orig
            num = (lp - lm) / (2.0 * h)
            denom = max(abs(num), abs(flat_g[i]), 1e-8)
            max_rel = max(max_rel, abs(num - flat_g[i]) / denom)
    return max_rel


def save_weights(net, path):
    """Plain-text dump: layer sizes on the first line, then one line per
    parameter tensor with row-major repr() values (round-trips bit-exactly)."""
    with open(path, "w") as f:
        f.write(" ".join(str(s) for s in net.layer_sizes) + "\n")
        for p in net.params():
            f.write(" ".join(repr(float(v)) for v in p.reshape(-1)) + "\n")


def load_weights(path, expected_input=None, expected_output=None):
    """Rebuild a QNetwork from `save_weights` output, validating dimensions."""
    with open(path) as f:
        lines = f.read().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty weight file")
    try:
        sizes = [int(s) for s in lines[0].split()]
    except ValueError as exc:
        raise ValueError(f"{path}: malformed header line") from exc
    if len(sizes) < 2:
        raise ValueError(f"{path}: need at least two layer sizes")
    if expected_input is not None and sizes[0] != expected_input:
        raise ValueError(
            f"{path}: input width {sizes[0]} does not match configured {expected_input}")
    if expected_output is not None and sizes[-1] != expected_output:
        raise ValueError(
            f"{path}: output width {sizes[-1]} does not match configured {expected_output}")
    net = QNetwork(sizes)
    params = net.params()
    if len(lines) - 1 < len(params):
        raise ValueError(f"{path}: truncated weight file")
    for p, line in zip(params, lines[1:]):
        vals = line.split()
        if len(vals) != p.size:
            raise ValueError(
                f"{path}: expected {p.size} values, found {len(vals)}")
        p.reshape(-1)[:] = [float(v) for v in vals]
    return net
