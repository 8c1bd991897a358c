"""Multi-agent deep Q-learning over the band/power action space.

Each V2V link is an independent learner with a private network and replay
buffer; cooperation enters only through the common reward.  Within a slot all
agents observe, then all select actions simultaneously; the slot advances only
after every agent that is due for a gradient step has taken it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import band_available, path_loss, watts_to_dbm
from .episode import (
    Action,
    EpisodeConfig,
    EpisodeState,
    EpisodeStreams,
    SlotOutcome,
    compute_reward,
    new_episode,
    step,
)
from .qnet import QNetwork, ReplayBuffer, init_qnetwork, select_action, train_step
from .streams import StreamFamily


def action_space_size(num_bands: int, num_powers: int) -> int:
    return num_bands * num_powers

def action_from_index(index: int, num_powers: int) -> Action:
    return Action(band_index=index // num_powers, power_index=index % num_powers)

def index_from_action(action: Action, num_powers: int) -> int:
    return action.band_index * num_powers + action.power_index


def observation_dim(num_bands: int, num_agents: int) -> int:
    # per band: own gain, sensed interference, availability; then payload and
    # time fractions; then the agent id one-hot
    return 3 * num_bands + 2 + num_agents


def _norm(value: float, lo: float, hi: float) -> float:
    return min(1.0, max(0.0, (value - lo) / (hi - lo)))


def observe(state: EpisodeState, agent: int, prev_outcome: SlotOutcome | None) -> np.ndarray:
    """Agent's sensing vector for the current slot.

    Own-link gains are current-slot CSI; interference entries are what the
    receiver measured in the previous slot (noise floor on the first slot).
    """
    k = state.num_agents
    if not 0 <= agent < k:
        raise ValueError(f"agent index {agent} out of range for K={k}")
    sc = state.scenario
    cfg = state.config
    n_b = len(state.bands)
    g_lo, g_hi = cfg.gain_db_range
    i_lo, i_hi = cfg.interference_dbm_range

    tx_id, rx_id = sc.v2v_links[agent]
    tx_pos = sc.vehicles[tx_id].position
    rx_pos = sc.vehicles[rx_id].position
    d = math.hypot(tx_pos[0] - rx_pos[0], tx_pos[1] - rx_pos[1])

    if prev_outcome is None:
        interf_w = state.noise_floor_w()
    else:
        interf_w = prev_outcome.measured_interference_w[agent]

    vec = np.empty(observation_dim(n_b, k))
    pos = 0
    for b, band in enumerate(state.bands):
        gain_db = (
            -path_loss(band.params, d)
            - state.shadow_db[agent, agent, b]
            + 10.0 * math.log10(state.fading_lin[agent, agent, b])
        )
        vec[pos] = _norm(gain_db, g_lo, g_hi)
        vec[pos + 1] = _norm(watts_to_dbm(float(interf_w[b])), i_lo, i_hi)
        vec[pos + 2] = 1.0 if band_available(band, tx_id, sc, state.tvws_on[b]) else 0.0
        pos += 3
    payload = state.payloads[agent]
    remaining = payload.chunks_total - payload.chunks_delivered
    vec[pos] = remaining / payload.chunks_total if payload.chunks_total > 0 else 0.0
    vec[pos + 1] = (cfg.num_slots - state.slot) / cfg.num_slots
    one_hot = np.zeros(k)
    one_hot[agent] = 1.0
    vec[pos + 2:] = one_hot
    return vec


def valid_action_mask(obs: np.ndarray, num_bands: int, num_powers: int) -> np.ndarray:
    """Boolean mask over (band, power) actions from the observed availability flags."""
    flags = obs[2:3 * num_bands:3] > 0.5
    return np.repeat(flags, num_powers)


def linear_epsilon(episode: int, start: float, end: float, decay_episodes: int) -> float:
    """Linear schedule from start at episode 0 to end at decay_episodes."""
    if decay_episodes < 1:
        raise ValueError(f"decay_episodes must be >= 1, got {decay_episodes}")
    if episode >= decay_episodes:
        return end
    frac = max(0.0, episode / decay_episodes)
    return start + (end - start) * frac


@dataclass(frozen=True)
class TrainConfig:
    episodes: int = 1500
    learning_rate: float = 1e-3
    gamma: float = 0.95
    replay_capacity: int = 50_000
    batch_size: int = 64
    target_copy_period: int = 200      # in gradient updates
    update_period: int = 2             # in slots
    epsilon_start: float = 1.0
    epsilon_end: float = 0.02
    epsilon_decay_episodes: int = 600
    grad_clip: float = 10.0
    hidden: tuple[int, ...] = (256, 128)

    def validate(self) -> None:
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        for name in ("epsilon_start", "epsilon_end"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.episodes < 0:
            raise ValueError(f"episodes must be >= 0, got {self.episodes}")
        if self.batch_size < 1 or self.replay_capacity < self.batch_size:
            raise ValueError("replay capacity must be >= batch size >= 1")
        if self.update_period < 1 or self.target_copy_period < 1:
            raise ValueError("update and target-copy periods must be >= 1")


@dataclass
class TrainingTrace:
    episode_rewards: list[float] = field(default_factory=list)
    episode_successes: list[int] = field(default_factory=list)
    episode_slots: list[int] = field(default_factory=list)


class Learner:
    """Private network, target copy, replay buffer and streams for one agent."""

    def __init__(self, dims, cfg: TrainConfig, family: StreamFamily):
        self.net = init_qnetwork(dims, family.stream("init"))
        self.target = self.net.copy()
        self.buffer = ReplayBuffer(cfg.replay_capacity, dims[0])
        self.explore_rng = family.stream("explore")
        self.replay_rng = family.stream("replay")
        self.updates = 0

    def maybe_update(self, cfg: TrainConfig) -> None:
        if len(self.buffer) < cfg.batch_size:
            return
        batch = self.buffer.sample(cfg.batch_size, self.replay_rng)
        train_step(self.net, self.target, batch, cfg.gamma, cfg.learning_rate, cfg.grad_clip)
        self.updates += 1
        if self.updates % cfg.target_copy_period == 0:
            self.target = self.net.copy()


def train(
    scenario_generator,
    train_config: TrainConfig,
    bands,
    episode_config: EpisodeConfig,
    streams_root: StreamFamily,
) -> tuple[list[QNetwork], TrainingTrace]:
    """Train K independent learners; returns their networks and the trace.

    `scenario_generator(episode_index)` supplies a fresh world per episode.
    Episode env draws come from ("train-env", episode) substreams; learner
    draws come from ("agent", k, ...) substreams of `streams_root`.
    """
    train_config.validate()
    cfg = train_config
    probe = scenario_generator(0)
    k = len(probe.v2v_links)
    n_actions = action_space_size(len(bands), episode_config.num_powers)
    dims = (observation_dim(len(bands), k), *cfg.hidden, n_actions)
    learners = [Learner(dims, cfg, streams_root.family("agent", i)) for i in range(k)]
    trace = TrainingTrace()
    global_slot = 0

    for ep in range(cfg.episodes):
        scenario = scenario_generator(ep)
        env_streams = EpisodeStreams.derive(streams_root.family("train-env", ep))
        state = new_episode(scenario, bands, episode_config, env_streams)
        epsilon = linear_epsilon(ep, cfg.epsilon_start, cfg.epsilon_end, cfg.epsilon_decay_episodes)
        prev_outcome: SlotOutcome | None = None
        ep_reward = 0.0
        slots = 0
        idle = Action(0, 0)

        while not (state.finished or state.all_resolved):
            was_active = [not p.resolved for p in state.payloads]
            obs = [observe(state, i, prev_outcome) if was_active[i] else None for i in range(k)]
            act_idx = [
                select_action(
                    learners[i].net, obs[i], epsilon, learners[i].explore_rng,
                    valid=valid_action_mask(obs[i], len(bands), episode_config.num_powers),
                )
                if was_active[i] else -1
                for i in range(k)
            ]
            joint = [
                action_from_index(a, episode_config.num_powers) if a >= 0 else idle
                for a in act_idx
            ]
            outcome, state = step(state, joint)
            terminal = state.finished or state.all_resolved
            all_delivered = all(p.delivered for p in state.payloads)
            reward = float(
                compute_reward(outcome, terminal, all_delivered, episode_config.reward, k)[0]
            )
            ep_reward += reward
            for i in range(k):
                if not was_active[i]:
                    continue
                next_obs = observe(state, i, outcome)
                agent_done = state.payloads[i].resolved or state.finished
                learners[i].buffer.push(obs[i], act_idx[i], reward, next_obs, agent_done)
            prev_outcome = outcome
            slots += 1
            global_slot += 1
            if global_slot % cfg.update_period == 0:
                # barrier: every learner finishes its step before the next slot
                for learner in learners:
                    learner.maybe_update(cfg)

        trace.episode_rewards.append(ep_reward)
        trace.episode_successes.append(sum(1 for p in state.payloads if p.delivered))
        trace.episode_slots.append(slots)

    return [learner.net for learner in learners], trace


def greedy_policy_from_net(net: QNetwork):
    """Evaluation-time policy: pure argmax over the network's action values."""

    def policy(state: EpisodeState, agent: int, prev_outcome: SlotOutcome | None) -> Action:
        obs = observe(state, agent, prev_outcome)
        idx = int(np.argmax(net.forward(obs)))
        return action_from_index(idx, state.config.num_powers)

    return policy
