import os

import numpy as np
import pytest

from hetvnet.qnet import (
    QNetwork,
    ReplayBuffer,
    TransitionBatch,
    init_qnetwork,
    load_checkpoint,
    save_checkpoint,
    select_action,
    td_gradients,
    td_loss,
    td_targets,
    train_step,
)
from hetvnet.streams import substream


def _batch(rng, n, d, actions):
    return TransitionBatch(
        obs=rng.normal(size=(n, d)),
        actions=np.asarray(actions),
        rewards=rng.normal(size=n),
        next_obs=rng.normal(size=(n, d)),
        terminal=rng.random(n) < 0.3,
    )


def test_forward_all_zero_weights():
    net = QNetwork(dims=(4, 3, 2), weights=[np.zeros((4, 3)), np.zeros((3, 2))],
                   biases=[np.zeros(3), np.zeros(2)])
    assert np.array_equal(net.forward(np.ones(4)), np.zeros(2))


def test_forward_identity_single_layer():
    net = QNetwork(dims=(3, 3), weights=[np.eye(3)], biases=[np.zeros(3)])
    x = np.array([0.3, -1.2, 4.0])
    assert np.array_equal(net.forward(x), x)


def test_forward_matches_hand_rolled_oracle():
    rng = substream(10, "fwd")
    net = init_qnetwork((5, 7, 6, 4), rng)
    x = rng.normal(size=(9, 5))

    # independent re-implementation: explicit loops, no shared code path
    def oracle(v):
        h = list(v)
        for layer, (w, b) in enumerate(zip(net.weights, net.biases)):
            out = []
            for j in range(w.shape[1]):
                s = b[j]
                for i in range(w.shape[0]):
                    s += h[i] * w[i, j]
                if layer < len(net.weights) - 1 and s < 0:
                    s = 0.0
                out.append(s)
            h = out
        return np.array(h)

    got = net.forward(x)
    for row in range(9):
        want = oracle(x[row])
        rel = np.max(np.abs(got[row] - want) / np.maximum(np.abs(want), 1e-12))
        assert rel < 1e-6


def test_forward_rejects_dimension_mismatch():
    net = init_qnetwork((5, 4, 3), substream(1, "dim"))
    with pytest.raises(ValueError):
        net.forward(np.zeros(6))


def test_init_bounds_and_bias():
    net = init_qnetwork((30, 20, 10), substream(2, "init"))
    for w, (fi, fo) in zip(net.weights, ((30, 20), (20, 10))):
        bound = np.sqrt(6.0 / (fi + fo))
        assert np.max(np.abs(w)) <= bound
    assert all(np.all(b == 0) for b in net.biases)


def test_td_target_gamma_zero_is_reward():
    rng = substream(3, "g0")
    net = init_qnetwork((4, 8, 3), rng)
    batch = _batch(rng, 1, 4, [2])
    t = td_targets(net, batch, gamma=0.0)
    assert np.allclose(t, batch.rewards)


def test_td_target_terminal_drops_bootstrap():
    rng = substream(4, "term")
    net = init_qnetwork((4, 8, 3), rng)
    batch = _batch(rng, 6, 4, [0, 1, 2, 0, 1, 2])
    batch.terminal[:] = True
    assert np.allclose(td_targets(net, batch, gamma=0.9), batch.rewards)


def _finite_difference_check(seed: int) -> float:
    """Max relative error between analytic and central-difference gradients."""
    rng = substream(seed, "fd")
    net = init_qnetwork((4, 8, 3), rng)
    target = init_qnetwork((4, 8, 3), rng)
    batch = _batch(rng, 12, 4, rng.integers(0, 3, size=12))
    _, gw, gb = td_gradients(net, target, batch, gamma=0.9)
    h = 1e-4
    worst = 0.0
    params = [(net.weights, gw), (net.biases, gb)]
    for tensors, grads in params:
        for t, g in zip(tensors, grads):
            flat_t = t.reshape(-1)
            flat_g = g.reshape(-1)
            idx = substream(seed, "fd-pick", t.size).permutation(t.size)[:20]
            for i in idx:
                orig = flat_t[i]
                flat_t[i] = orig + h
                lp = td_loss(net, target, batch, 0.9)
                flat_t[i] = orig - h
                lm = td_loss(net, target, batch, 0.9)
                flat_t[i] = orig
                fd = (lp - lm) / (2 * h)
                denom = max(abs(fd), abs(flat_g[i]), 1e-8)
                worst = max(worst, abs(fd - flat_g[i]) / denom)
    return worst


def test_gradients_match_finite_differences():
    for seed in (11, 12, 13):
        assert _finite_difference_check(seed) < 1e-3


def test_train_step_reduces_loss_on_fixed_batch():
    rng = substream(5, "step")
    net = init_qnetwork((6, 16, 4), rng)
    target = net.copy()
    batch = _batch(rng, 32, 6, rng.integers(0, 4, size=32))
    before = td_loss(net, target, batch, 0.9)
    for _ in range(50):
        train_step(net, target, batch, 0.9, 1e-2)
    after = td_loss(net, target, batch, 0.9)
    assert after < before
    assert all(np.all(np.isfinite(w)) for w in net.weights)


def test_train_step_rejects_empty_batch():
    rng = substream(6, "empty")
    net = init_qnetwork((3, 4, 2), rng)
    empty = TransitionBatch(np.zeros((0, 3)), np.zeros(0, dtype=int), np.zeros(0),
                            np.zeros((0, 3)), np.zeros(0, dtype=bool))
    with pytest.raises(ValueError):
        train_step(net, net.copy(), empty, 0.9, 1e-3)


def _value_iteration(transitions, rewards, gamma, sweeps=500):
    n_s, n_a = rewards.shape
    q = np.zeros((n_s, n_a))
    for _ in range(sweeps):
        v = q.max(axis=1)
        q = rewards + gamma * v[transitions]
    return q


def test_tiny_mdp_matches_value_iteration_oracle():
    # deterministic 2-state 2-action MDP; myopic best differs from optimal
    transitions = np.array([[0, 1], [0, 1]])  # next state for (s, a)
    rewards = np.array([[1.0, 0.0], [0.0, 3.0]])
    gamma = 0.9
    q_star = _value_iteration(transitions, rewards, gamma)
    assert np.argmax(q_star[0]) == 1  # bootstrapped optimum, not the myopic a0

    rng = substream(21, "mdp")
    obs = np.eye(2)
    net = init_qnetwork((2, 16, 2), rng)
    target = net.copy()
    for step_i in range(5000):
        s = rng.integers(0, 2, size=16)
        a = rng.integers(0, 2, size=16)
        ns = transitions[s, a]
        batch = TransitionBatch(
            obs=obs[s], actions=a, rewards=rewards[s, a], next_obs=obs[ns],
            terminal=np.zeros(16, dtype=bool),
        )
        train_step(net, target, batch, gamma, 5e-2)
        if (step_i + 1) % 100 == 0:
            target = net.copy()
    for s in range(2):
        assert np.argmax(net.forward(obs[s])) == np.argmax(q_star[s])


def test_select_action_pure_greedy_and_tiebreak():
    net = QNetwork(dims=(3, 3), weights=[np.eye(3)], biases=[np.zeros(3)])
    rng = substream(7, "sel")
    assert select_action(net, np.array([1.0, 5.0, 2.0]), 0.0, rng) == 1
    assert select_action(net, np.array([3.0, 3.0, 1.0]), 0.0, rng) == 0


def test_select_action_epsilon_one_uniform():
    net = init_qnetwork((4, 12), substream(8, "sel2"))
    rng = substream(9, "sel3")
    obs = np.zeros(4)
    counts = np.zeros(12)
    n = 100_000
    for _ in range(n):
        counts[select_action(net, obs, 1.0, rng)] += 1
    freqs = counts / n
    assert np.all(np.abs(freqs - 1.0 / 12.0) < 0.015)


def test_select_action_epsilon_validation():
    net = init_qnetwork((2, 2), substream(1, "v"))
    with pytest.raises(ValueError):
        select_action(net, np.zeros(2), 1.5, substream(2, "v"))


def test_replay_fifo_eviction():
    buf = ReplayBuffer(capacity=2, obs_dim=1)
    for label, r in (("a", 1.0), ("b", 2.0), ("c", 3.0)):
        buf.push(np.zeros(1), 0, r, np.zeros(1), False)
    assert len(buf) == 2
    rng = substream(3, "rp")
    seen = set()
    for _ in range(100):
        seen.update(buf.sample(2, rng).rewards.tolist())
    assert seen == {2.0, 3.0}


def test_replay_single_item():
    buf = ReplayBuffer(capacity=4, obs_dim=2)
    buf.push(np.array([1.0, 2.0]), 3, 7.0, np.array([4.0, 5.0]), True)
    batch = buf.sample(1, substream(4, "rp"))
    assert batch.actions[0] == 3 and batch.rewards[0] == 7.0 and bool(batch.terminal[0])


def test_replay_uniform_sampling():
    buf = ReplayBuffer(capacity=8, obs_dim=1)
    for i in range(4):
        buf.push(np.zeros(1), i, float(i), np.zeros(1), False)
    rng = substream(5, "rp")
    counts = np.zeros(4)
    n = 100_000
    for _ in range(n // 4):
        batch = buf.sample(4, rng)
        for a in range(4):
            counts[a] += np.sum(batch.actions == a)
    assert np.all(np.abs(counts / n - 0.25) < 0.02)


def test_replay_rejects_underfilled_sample():
    buf = ReplayBuffer(capacity=8, obs_dim=1)
    buf.push(np.zeros(1), 0, 0.0, np.zeros(1), False)
    with pytest.raises(ValueError):
        buf.sample(2, substream(6, "rp"))


def test_checkpoint_round_trip_exact(tmp_path):
    rng = substream(30, "ckpt")
    net = init_qnetwork((7, 5, 4), rng)
    for _ in range(3):
        train_step(net, net.copy(), _batch(rng, 8, 7, rng.integers(0, 4, size=8)), 0.9, 1e-2)
    path = tmp_path / "net.qnet"
    save_checkpoint(net, path)
    loaded = load_checkpoint(path)
    assert loaded.dims == net.dims
    for a, b in zip(loaded.weights + loaded.biases, net.weights + net.biases):
        assert np.array_equal(a, b)


def test_checkpoint_header_format(tmp_path):
    net = init_qnetwork((3, 2), substream(31, "ckpt"))
    path = tmp_path / "net.qnet"
    save_checkpoint(net, path)
    with open(path) as fh:
        header = fh.readline().split()
    assert header == ["qnet", "v1", "1", "3", "2"]


def test_checkpoint_rejects_corrupt_files(tmp_path):
    bad = tmp_path / "bad.qnet"
    bad.write_text("not a checkpoint\n")
    with pytest.raises(ValueError):
        load_checkpoint(bad)
    truncated = tmp_path / "short.qnet"
    truncated.write_text("qnet v1 1 3 2\n1.0 2.0\n")
    with pytest.raises(ValueError):
        load_checkpoint(truncated)


def test_target_copy_is_bit_identical_snapshot():
    rng = substream(32, "tgt")
    net = init_qnetwork((4, 6, 3), rng)
    target = net.copy()
    for a, b in zip(target.weights, net.weights):
        assert np.array_equal(a, b)
    train_step(net, target, _batch(rng, 8, 4, rng.integers(0, 3, size=8)), 0.9, 1e-2)
    # online moved, target must still equal the snapshot taken at copy time
    assert any(not np.array_equal(a, b) for a, b in zip(target.weights, net.weights))
