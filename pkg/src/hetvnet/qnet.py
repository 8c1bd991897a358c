"""Hand-rolled feed-forward Q-network: forward pass, TD backprop, replay.

Kept dependency-free (numpy only) so the gradient path stays inspectable and
checkable against finite differences.  Weight matrices are (fan_in, fan_out)
with forward convention y = x @ W + b; hidden layers are rectified, the output
layer is linear over the flattened (band, power) action space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class QNetwork:
    dims: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def num_actions(self) -> int:
        return self.dims[-1]

    def copy(self) -> "QNetwork":
        return QNetwork(
            dims=self.dims,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Action values for one observation (1-D) or a batch (2-D)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        h = x[None, :] if single else x
        if h.shape[-1] != self.dims[0]:
            raise ValueError(f"observation dim {h.shape[-1]} != network input {self.dims[0]}")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < len(self.weights) - 1:
                h = np.maximum(h, 0.0)
        return h[0] if single else h


def init_qnetwork(dims, rng: np.random.Generator) -> QNetwork:
    """Glorot-uniform weights, zero biases."""
    dims = tuple(int(d) for d in dims)
    if len(dims) < 2 or any(d <= 0 for d in dims):
        raise ValueError(f"bad layer dims: {dims}")
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return QNetwork(dims=dims, weights=weights, biases=biases)


@dataclass
class TransitionBatch:
    obs: np.ndarray        # (B, D)
    actions: np.ndarray    # (B,) int
    rewards: np.ndarray    # (B,)
    next_obs: np.ndarray   # (B, D)
    terminal: np.ndarray   # (B,) bool


def td_targets(target_net: QNetwork, batch: TransitionBatch, gamma: float) -> np.ndarray:
    next_q = target_net.forward(batch.next_obs)
    bootstrap = np.where(batch.terminal, 0.0, next_q.max(axis=1))
    return batch.rewards + gamma * bootstrap


def td_loss(net: QNetwork, target_net: QNetwork, batch: TransitionBatch, gamma: float) -> float:
    q = net.forward(batch.obs)
    taken = q[np.arange(len(batch.actions)), batch.actions]
    err = taken - td_targets(target_net, batch, gamma)
    return float(np.mean(err * err))


def td_gradients(
    net: QNetwork, target_net: QNetwork, batch: TransitionBatch, gamma: float
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Mean-squared TD error and its gradients wrt every weight and bias.

    Only the taken action's output unit carries error for each sample.
    """
    x = np.asarray(batch.obs, dtype=float)
    n = len(batch.actions)
    # forward with cached pre-activations
    acts = [x]
    zs = []
    h = x
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = h @ w + b
        zs.append(z)
        h = np.maximum(z, 0.0) if i < last else z
        acts.append(h)
    q = acts[-1]
    taken = q[np.arange(n), batch.actions]
    err = taken - td_targets(target_net, batch, gamma)
    loss = float(np.mean(err * err))

    dz = np.zeros_like(q)
    dz[np.arange(n), batch.actions] = 2.0 * err / n
    grads_w: list[np.ndarray] = [None] * len(net.weights)
    grads_b: list[np.ndarray] = [None] * len(net.weights)
    for i in range(last, -1, -1):
        grads_w[i] = acts[i].T @ dz
        grads_b[i] = dz.sum(axis=0)
        if i > 0:
            dz = (dz @ net.weights[i].T) * (zs[i - 1] > 0.0)
    return loss, grads_w, grads_b


def clip_gradients(grads_w, grads_b, max_norm: float) -> float:
    """Scale all gradients in place so the global L2 norm is <= max_norm."""
    sq = sum(float(np.sum(g * g)) for g in grads_w) + sum(float(np.sum(g * g)) for g in grads_b)
    norm = float(np.sqrt(sq))
    if max_norm > 0 and norm > max_norm:
        scale = max_norm / norm
        for g in grads_w:
            g *= scale
        for g in grads_b:
            g *= scale
    return norm


def train_step(
    net: QNetwork,
    target_net: QNetwork,
    batch: TransitionBatch,
    gamma: float,
    learning_rate: float,
    grad_clip: float = 10.0,
) -> QNetwork:
    """One clipped SGD step on the mean-squared TD error; returns the net."""
    if len(batch.actions) == 0:
        raise ValueError("empty batch")
    _, gw, gb = td_gradients(net, target_net, batch, gamma)
    clip_gradients(gw, gb, grad_clip)
    for w, g in zip(net.weights, gw):
        w -= learning_rate * g
    for b, g in zip(net.biases, gb):
        b -= learning_rate * g
    return net


def select_action(
    net: QNetwork,
    obs: np.ndarray,
    epsilon: float,
    rng: np.random.Generator,
    valid: np.ndarray | None = None,
) -> int:
    """Epsilon-greedy: explore uniformly over the valid indices, else argmax.

    `valid` is an optional boolean mask over the action space (e.g. actions
    whose band is currently available); exploration draws only from it.  The
    exploitation branch is a plain argmax with ties broken to the lowest index.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    if epsilon > 0.0 and rng.random() < epsilon:
        if valid is None:
            return int(rng.integers(net.num_actions))
        indices = np.flatnonzero(valid)
        if indices.size == 0:
            return int(rng.integers(net.num_actions))
        return int(indices[rng.integers(indices.size)])
    return int(np.argmax(net.forward(obs)))


class ReplayBuffer:
    """Fixed-capacity ring buffer with uniform with-replacement sampling."""

    def __init__(self, capacity: int, obs_dim: int):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._obs = np.zeros((capacity, obs_dim))
        self._actions = np.zeros(capacity, dtype=np.int64)
        self._rewards = np.zeros(capacity)
        self._next_obs = np.zeros((capacity, obs_dim))
        self._terminal = np.zeros(capacity, dtype=bool)
        self._next = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def push(self, obs, action: int, reward: float, next_obs, terminal: bool) -> None:
        i = self._next
        self._obs[i] = obs
        self._actions[i] = action
        self._rewards[i] = reward
        self._next_obs[i] = next_obs
        self._terminal[i] = terminal
        self._next = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> TransitionBatch:
        if batch_size > self._size:
            raise ValueError(f"cannot sample {batch_size} from buffer of size {self._size}")
        idx = rng.integers(self._size, size=batch_size)
        return TransitionBatch(
            obs=self._obs[idx].copy(),
            actions=self._actions[idx].copy(),
            rewards=self._rewards[idx].copy(),
            next_obs=self._next_obs[idx].copy(),
            terminal=self._terminal[idx].copy(),
        )


CHECKPOINT_MAGIC = "qnet"
CHECKPOINT_VERSION = "v1"


def save_checkpoint(net: QNetwork, path) -> None:
    """Plain-text dump: header, weight matrices row-major, then bias vectors."""
    lines = [
        f"{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION} {len(net.weights)} "
        + " ".join(str(d) for d in net.dims)
    ]
    for w in net.weights:
        for row in w:
            lines.append(" ".join(repr(float(v)) for v in row))
    for b in net.biases:
        lines.append(" ".join(repr(float(v)) for v in b))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_checkpoint(path) -> QNetwork:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) < 4 or header[0] != CHECKPOINT_MAGIC or header[1] != CHECKPOINT_VERSION:
            raise ValueError(f"{path}: not a {CHECKPOINT_MAGIC} {CHECKPOINT_VERSION} checkpoint")
        n_layers = int(header[2])
        dims = tuple(int(d) for d in header[3:])
        if len(dims) != n_layers + 1:
            raise ValueError(f"{path}: header claims {n_layers} layers but lists {len(dims)} dims")
        tokens = fh.read().split()
    expect = sum(a * b for a, b in zip(dims[:-1], dims[1:])) + sum(dims[1:])
    if len(tokens) != expect:
        raise ValueError(f"{path}: expected {expect} parameter tokens, found {len(tokens)}")
    values = np.array([float(t) for t in tokens])
    weights, biases = [], []
    pos = 0
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        weights.append(values[pos:pos + fan_in * fan_out].reshape(fan_in, fan_out).copy())
        pos += fan_in * fan_out
    for fan_out in dims[1:]:
        biases.append(values[pos:pos + fan_out].copy())
        pos += fan_out
    return QNetwork(dims=dims, weights=weights, biases=biases)
