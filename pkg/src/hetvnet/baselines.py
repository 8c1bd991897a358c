"""Comparison policies: single-shared-learner Q-learning, random, greedy.

The shared-learner variant trains ONE network fed by every agent's
transitions; within a slot agents act sequentially in id order and each sees
how many lower-indexed agents already claimed each band this slot.  Random and
greedy are the non-learning control lines; both respect band availability.
"""

from __future__ import annotations

import enum
import math
from typing import Optional, Sequence

import numpy as np

from .channel import Band, band_available, dbm_to_watts
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
from .marl import (
    valid_action_mask,
    TrainConfig,
    TrainingTrace,
    Learner,
    action_from_index,
    action_space_size,
    linear_epsilon,
    observation_dim,
    observe,
)
from .qnet import QNetwork, select_action
from .streams import StreamFamily


class PolicyKind(enum.Enum):
    MARL = "marl"
    SARL = "sarl"
    RANDOM = "random"
    GREEDY = "greedy"


def claims_block_size(num_bands: int, num_agents: int) -> int:
    # With a single agent there are never prior claims to observe.
    return num_bands if num_agents > 1 else 0


def sarl_observation_dim(num_bands: int, num_agents: int) -> int:
    return observation_dim(num_bands, num_agents) + claims_block_size(num_bands, num_agents)


def observe_with_claims(
    state: EpisodeState,
    agent: int,
    prev_outcome: Optional[SlotOutcome],
    claims: Optional[np.ndarray],
) -> np.ndarray:
    """Base observation plus the per-band count of same-slot claims (if K > 1)."""
    base = observe(state, agent, prev_outcome)
    k = state.num_agents
    block = claims_block_size(len(state.bands), k)
    if block == 0:
        return base
    if claims is None:
        counts = np.zeros(block)
    else:
        counts = np.asarray(claims, dtype=float) / k
    return np.concatenate([base, counts])


def sarl_train(
    scenario_generator,
    train_config: TrainConfig,
    bands,
    episode_config: EpisodeConfig,
    streams_root: StreamFamily,
) -> tuple[QNetwork, TrainingTrace]:
    """Train one shared network over sequential-within-slot agent decisions.

    Stream derivation matches the multi-agent trainer's agent 0, and stored
    next-observations carry an empty claims block (the bootstrap convention),
    so with K=1 this reduces exactly to single-agent training.
    """
    train_config.validate()
    cfg = train_config
    probe = scenario_generator(0)
    k = len(probe.v2v_links)
    n_b = len(bands)
    n_actions = action_space_size(n_b, episode_config.num_powers)
    dims = (sarl_observation_dim(n_b, k), *cfg.hidden, n_actions)
    learner = Learner(dims, cfg, streams_root.family("agent", 0))
    trace = TrainingTrace()
    global_slot = 0

    for ep in range(cfg.episodes):
        scenario = scenario_generator(ep)
        env_streams = EpisodeStreams.derive(streams_root.family("train-env", ep))
        state = new_episode(scenario, bands, episode_config, env_streams)
        epsilon = linear_epsilon(ep, cfg.epsilon_start, cfg.epsilon_end, cfg.epsilon_decay_episodes)
        prev_outcome: Optional[SlotOutcome] = None
        ep_reward = 0.0
        slots = 0
        idle = Action(0, 0)

        while not (state.finished or state.all_resolved):
            was_active = [not p.resolved for p in state.payloads]
            claims = np.zeros(n_b)
            obs: list[Optional[np.ndarray]] = [None] * k
            joint = [idle] * k
            act_idx = [-1] * k
            for i in range(k):  # sequential, fixed id order
                if not was_active[i]:
                    continue
                obs[i] = observe_with_claims(state, i, prev_outcome, claims)
                a = select_action(
                    learner.net, obs[i], epsilon, learner.explore_rng,
                    valid=valid_action_mask(obs[i], n_b, episode_config.num_powers),
                )
                act_idx[i] = a
                joint[i] = action_from_index(a, episode_config.num_powers)
                claims[joint[i].band_index] += 1
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
                next_obs = observe_with_claims(state, i, outcome, None)
                agent_done = state.payloads[i].resolved or state.finished
                learner.buffer.push(obs[i], act_idx[i], reward, next_obs, agent_done)
            prev_outcome = outcome
            slots += 1
            global_slot += 1
            if global_slot % cfg.update_period == 0:
                # same gradient budget as K independent learners on one net
                for _ in range(k):
                    learner.maybe_update(cfg)

        trace.episode_rewards.append(ep_reward)
        trace.episode_successes.append(sum(1 for p in state.payloads if p.delivered))
        trace.episode_slots.append(slots)

    return learner.net, trace


class SarlEvalPolicy:
    """Greedy shared-network policy; tracks same-slot claims across agents.

    Assumes the episode driver consults agents in ascending id order within
    each slot (which `run_episode` does).
    """

    def __init__(self, net: QNetwork):
        self.net = net
        self._slot = -1
        self._claims: Optional[np.ndarray] = None

    def __call__(self, state: EpisodeState, agent: int, prev: Optional[SlotOutcome]) -> Action:
        if state.slot != self._slot or self._claims is None:
            self._slot = state.slot
            self._claims = np.zeros(len(state.bands))
        obs = observe_with_claims(state, agent, prev, self._claims)
        idx = int(np.argmax(self.net.forward(obs)))
        action = action_from_index(idx, state.config.num_powers)
        self._claims[action.band_index] += 1
        return action


def valid_actions(state: EpisodeState, agent: int) -> list[Action]:
    """Every (available band, power) combination for this agent right now."""
    sc = state.scenario
    tx = sc.v2v_links[agent][0]
    acts = []
    for band in state.bands:
        if band_available(band, tx, sc, state.tvws_on[band.index]):
            for p in range(state.config.num_powers):
                acts.append(Action(band_index=band.index, power_index=p))
    return acts


def random_policy(valid: Sequence[Action], rng: np.random.Generator) -> Action:
    """Uniform draw from a non-empty valid action set."""
    if len(valid) == 0:
        raise ValueError("empty valid action set")
    return valid[int(rng.integers(len(valid)))]


def make_random_policy(rng: np.random.Generator):
    def policy(state: EpisodeState, agent: int, prev: Optional[SlotOutcome]) -> Action:
        return random_policy(valid_actions(state, agent), rng)

    return policy


def greedy_policy(obs: np.ndarray, bands: Sequence[Band], config: EpisodeConfig) -> Action:
    """Max estimated own rate from sensed CSI, at max power, ignoring others.

    Rate estimate per band: bandwidth * log2(1 + P * gain / interference),
    with gain and last-slot interference read back from the observation's
    normalized entries.  Unavailable bands are skipped; ties break to the
    lowest band index.  Power index 0 is the maximum of the catalog.
    """
    g_lo, g_hi = config.gain_db_range
    i_lo, i_hi = config.interference_dbm_range
    p_max = dbm_to_watts(config.powers_dbm[0])
    best_idx, best_rate = -1, -1.0
    for b, band in enumerate(bands):
        gain_n, interf_n, avail = obs[3 * b], obs[3 * b + 1], obs[3 * b + 2]
        if avail < 0.5:
            continue
        gain = 10.0 ** ((g_lo + gain_n * (g_hi - g_lo)) / 10.0)
        interf = dbm_to_watts(i_lo + interf_n * (i_hi - i_lo))
        rate = band.bandwidth_hz * math.log2(1.0 + p_max * gain / interf)
        if rate > best_rate + 1e-9:
            best_rate = rate
            best_idx = b
    if best_idx < 0:
        best_idx = 0
    return Action(band_index=best_idx, power_index=0)


def make_greedy_policy():
    def policy(state: EpisodeState, agent: int, prev: Optional[SlotOutcome]) -> Action:
        return greedy_policy(observe(state, agent, prev), state.bands, state.config)

    return policy
