"""Time-slotted transmission environment.

Each slot: agents place availability-checked transmissions on bands, SINR is
computed with same-band interference, V2I capacities are recorded, and every
unresolved agent attempts one payload chunk.  A chunk goes through only if the
link sustained the chunk rate and the SINR floor; any failed attempt marks the
whole payload failed (all-or-nothing delivery).  Resolved agents stay silent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .channel import (
    Band,
    RatKind,
    Transmission,
    band_available,
    capacity,
    compute_sinr,
    dbm_to_watts,
)
from .streams import StreamFamily
from .topology import Scenario, step_mobility


@dataclass(frozen=True)
class RewardWeights:
    lambda_i: float = 0.1   # weight per Mbps of V2I sum capacity
    lambda_v: float = 0.9   # weight per Mbps of active V2V rates
    beta: float = 10.0      # terminal bonus when every payload arrived
    strict: bool = False    # terminal-only reward


@dataclass(frozen=True)
class EpisodeConfig:
    num_slots: int = 100
    slot_duration_s: float = 1e-3
    payload_bytes: int = 1060
    chunk_bytes: int = 300
    sinr_min: float = 1.0                      # linear SINR floor for a chunk
    powers_dbm: tuple[float, ...] = (23.0, 10.0, 5.0)
    v2i_power_dbm: float = 0.0
    reward: RewardWeights = RewardWeights()
    # observation normalization ranges (dB / dBm)
    gain_db_range: tuple[float, float] = (-120.0, -40.0)
    interference_dbm_range: tuple[float, float] = (-120.0, -30.0)

    @property
    def num_powers(self) -> int:
        return len(self.powers_dbm)


@dataclass(frozen=True)
class PayloadTask:
    total_bytes: int
    chunk_bytes: int
    chunks_total: int
    chunks_delivered: int = 0
    failed: bool = False
    deadline_slots: int = 100

    @property
    def delivered(self) -> bool:
        return self.chunks_delivered >= self.chunks_total and not self.failed

    @property
    def resolved(self) -> bool:
        return self.failed or self.chunks_delivered >= self.chunks_total


def new_payload(total_bytes: int, chunk_bytes: int, deadline_slots: int) -> PayloadTask:
    if total_bytes < 0 or chunk_bytes <= 0:
        raise ValueError(f"invalid payload spec: total={total_bytes}, chunk={chunk_bytes}")
    return PayloadTask(
        total_bytes=total_bytes,
        chunk_bytes=chunk_bytes,
        chunks_total=math.ceil(total_bytes / chunk_bytes),
        deadline_slots=deadline_slots,
    )


@dataclass(frozen=True)
class Action:
    band_index: int
    power_index: int


JointAction = Sequence[Action]


@dataclass(frozen=True)
class SlotOutcome:
    v2i_capacity_bps: np.ndarray        # (M,)
    v2v_rate_bps: np.ndarray            # (K,) link Shannon rate, 0 when silent
    v2v_goodput_bps: np.ndarray         # (K,) delivered chunk bits per second
    delivered: np.ndarray               # (K,) bool, chunk landed this slot
    chunk_failed: np.ndarray            # (K,) bool, attempt lost this slot
    transmitted: np.ndarray             # (K,) bool
    measured_interference_w: np.ndarray  # (K, N_b) interference + noise per band


@dataclass(frozen=True)
class EpisodeMetrics:
    v2i_sum_capacity_bps: float         # mean over slots of the V2I sum
    success_flags: tuple[bool, ...]     # per agent
    cumulative_reward: float
    slots_used: int                     # slot count until every payload resolved


@dataclass
class EpisodeStreams:
    """Independent per-concern rng streams for one episode."""
    mobility: np.random.Generator
    shadowing: np.random.Generator
    fading: np.random.Generator
    tvws: np.random.Generator
    wifi: np.random.Generator

    @classmethod
    def derive(cls, family: StreamFamily) -> "EpisodeStreams":
        return cls(
            mobility=family.stream("mobility"),
            shadowing=family.stream("shadowing"),
            fading=family.stream("fading"),
            tvws=family.stream("tvws"),
            wifi=family.stream("wifi"),
        )


@dataclass
class EpisodeState:
    """Mutable-by-replacement snapshot of the world between slots."""
    scenario: Scenario
    bands: tuple[Band, ...]
    config: EpisodeConfig
    slot: int
    payloads: tuple[PayloadTask, ...]
    tvws_on: tuple[bool, ...]           # aligned with bands (False for non-TVWS)
    shadow_db: np.ndarray               # (n_tx, n_rx, N_b) fixed per episode
    fading_lin: np.ndarray              # (n_tx, n_rx, N_b) current slot
    streams: EpisodeStreams

    @property
    def num_agents(self) -> int:
        return len(self.scenario.v2v_links)

    @property
    def num_v2i(self) -> int:
        return len(self.scenario.v2i_links)

    @property
    def finished(self) -> bool:
        return self.slot >= self.config.num_slots

    @property
    def all_resolved(self) -> bool:
        return all(p.resolved for p in self.payloads)

    def noise_floor_w(self) -> np.ndarray:
        return np.array([b.noise_watts() for b in self.bands])


def _tx_positions(state: EpisodeState) -> np.ndarray:
    """Transmitter coordinates: K V2V senders then M V2I senders."""
    sc = state.scenario
    rows = [sc.vehicles[tx].position for tx, _ in sc.v2v_links]
    rows += [sc.vehicles[vid].position for vid, _ in sc.v2i_links]
    return np.array(rows, dtype=float)


def _rx_positions(state: EpisodeState) -> np.ndarray:
    """Receiver coordinates: K V2V receivers then the base station."""
    sc = state.scenario
    rows = [sc.vehicles[rx].position for _, rx in sc.v2v_links]
    rows.append(sc.base_station)
    return np.array(rows, dtype=float)


def _gain_tensor(state: EpisodeState) -> np.ndarray:
    """(n_tx, n_rx, N_b) linear power gains for the current slot."""
    tx = _tx_positions(state)
    rx = _rx_positions(state)
    d = np.hypot(tx[:, None, 0] - rx[None, :, 0], tx[:, None, 1] - rx[None, :, 1])
    d = np.maximum(d, 1.0)
    alpha = np.array([b.params.alpha for b in state.bands])
    pl0 = np.array([b.params.pl0_db for b in state.bands])
    pl = pl0[None, None, :] + 10.0 * alpha[None, None, :] * np.log10(d / 10.0)[:, :, None]
    return 10.0 ** (-(pl + state.shadow_db) / 10.0) * state.fading_lin


def _draw_shadowing(rng, n_tx: int, n_rx: int, bands: Sequence[Band]) -> np.ndarray:
    sigma = np.array([b.params.shadow_sigma_db for b in bands])
    return rng.normal(0.0, 1.0, size=(n_tx, n_rx, len(bands))) * sigma[None, None, :]


def _draw_fading(rng, n_tx: int, n_rx: int, n_bands: int) -> np.ndarray:
    return rng.exponential(1.0, size=(n_tx, n_rx, n_bands))


def new_episode(
    scenario: Scenario,
    bands: tuple[Band, ...],
    config: EpisodeConfig,
    streams: EpisodeStreams,
) -> EpisodeState:
    """Fresh episode state: shadowing drawn, slot-0 fading drawn, TVWS seeded."""
    k = len(scenario.v2v_links)
    m = len(scenario.v2i_links)
    n_tx, n_rx = k + m, k + 1
    tvws_on = []
    for b in bands:
        if b.rat is RatKind.TV_WHITE_SPACE:
            on = streams.tvws.random() < b.tvws_occupancy.stationary_on()
            tvws_on.append(bool(on))
        else:
            tvws_on.append(False)
    payload = new_payload(config.payload_bytes, config.chunk_bytes, config.num_slots)
    return EpisodeState(
        scenario=scenario,
        bands=bands,
        config=config,
        slot=0,
        payloads=tuple(payload for _ in range(k)),
        tvws_on=tuple(tvws_on),
        shadow_db=_draw_shadowing(streams.shadowing, n_tx, n_rx, bands),
        fading_lin=_draw_fading(streams.fading, n_tx, n_rx, len(bands)),
        streams=streams,
    )


def _validate_joint_action(state: EpisodeState, joint_action: JointAction) -> None:
    k = state.num_agents
    if len(joint_action) != k:
        raise ValueError(f"joint action length {len(joint_action)} != K={k}")
    n_b, n_p = len(state.bands), state.config.num_powers
    for i, a in enumerate(joint_action):
        if not (0 <= a.band_index < n_b):
            raise ValueError(f"agent {i}: band index {a.band_index} out of [0, {n_b})")
        if not (0 <= a.power_index < n_p):
            raise ValueError(f"agent {i}: power index {a.power_index} out of [0, {n_p})")


def step(state: EpisodeState, joint_action: JointAction) -> tuple[SlotOutcome, EpisodeState]:
    """Advance one slot: transmit, account chunks, move vehicles, refresh fading."""
    if state.finished:
        raise ValueError("episode already finished")
    _validate_joint_action(state, joint_action)

    cfg = state.config
    sc = state.scenario
    k, m = state.num_agents, state.num_v2i
    n_b = len(state.bands)

    active = np.array([not p.resolved for p in state.payloads])
    band_idx = np.array([a.band_index for a in joint_action])
    power_w = np.array([dbm_to_watts(cfg.powers_dbm[a.power_index]) for a in joint_action])

    transmitted = np.zeros(k, dtype=bool)
    for i in range(k):
        if not active[i]:
            continue
        band = state.bands[band_idx[i]]
        transmitted[i] = band_available(band, sc.v2v_links[i][0], sc, state.tvws_on[band.index])

    # Wi-Fi contention: one winner per AP band, losers stay silent this slot.
    for band in state.bands:
        if band.rat is not RatKind.WIFI_AP:
            continue
        contenders = [i for i in range(k) if transmitted[i] and band_idx[i] == band.index]
        if len(contenders) > 1:
            winner = contenders[int(state.streams.wifi.integers(len(contenders)))]
            for i in contenders:
                transmitted[i] = i == winner
        elif len(contenders) == 1:
            # contention slot resolves trivially; no draw consumed
            pass

    gains = _gain_tensor(state)  # (k+m, k+1, n_b)
    v2i_power = dbm_to_watts(cfg.v2i_power_dbm)

    def transmissions_to(rx: int) -> list[Transmission]:
        entries = [
            Transmission(tx_id=j, band_index=int(band_idx[j]),
                         power_watts=float(power_w[j]), gain=float(gains[j, rx, band_idx[j]]))
            for j in range(k) if transmitted[j]
        ]
        entries += [
            Transmission(tx_id=k + j, band_index=band, power_watts=v2i_power,
                         gain=float(gains[k + j, rx, band]))
            for j, (_, band) in enumerate(sc.v2i_links)
        ]
        return entries

    # V2V links
    v2v_rate = np.zeros(k)
    v2v_sinr = np.zeros(k)
    for i in range(k):
        if not transmitted[i]:
            continue
        band = state.bands[band_idx[i]]
        report = compute_sinr(i, band, transmissions_to(i))
        v2v_sinr[i] = report.sinr
        v2v_rate[i] = capacity(report.sinr, band.bandwidth_hz)

    # V2I links (base station receiver is the last rx row)
    v2i_cap = np.zeros(m)
    for j, (_, band_i) in enumerate(sc.v2i_links):
        band = state.bands[band_i]
        report = compute_sinr(k + j, band, transmissions_to(k))
        v2i_cap[j] = capacity(report.sinr, band.bandwidth_hz)

    # chunk accounting: every unresolved agent attempts exactly one chunk
    chunk_bits = cfg.chunk_bytes * 8
    delivered = np.zeros(k, dtype=bool)
    chunk_failed = np.zeros(k, dtype=bool)
    new_payloads = list(state.payloads)
    for i in range(k):
        if not active[i]:
            continue
        ok = (
            transmitted[i]
            and v2v_rate[i] * cfg.slot_duration_s >= chunk_bits
            and v2v_sinr[i] >= cfg.sinr_min
        )
        if ok:
            delivered[i] = True
            new_payloads[i] = replace(
                state.payloads[i], chunks_delivered=state.payloads[i].chunks_delivered + 1
            )
        else:
            chunk_failed[i] = True
            new_payloads[i] = replace(state.payloads[i], failed=True)

    # per-agent sensed interference on every band (previous-slot input for sensing)
    noise = state.noise_floor_w()
    measured = np.tile(noise, (k, 1))
    for i in range(k):
        for j in range(k):
            if j != i and transmitted[j]:
                measured[i, band_idx[j]] += power_w[j] * gains[j, i, band_idx[j]]
        for j, (_, band_i) in enumerate(sc.v2i_links):
            measured[i, band_i] += v2i_power * gains[k + j, i, band_i]

    outcome = SlotOutcome(
        v2i_capacity_bps=v2i_cap,
        v2v_rate_bps=v2v_rate,
        v2v_goodput_bps=delivered * (chunk_bits / cfg.slot_duration_s),
        delivered=delivered,
        chunk_failed=chunk_failed,
        transmitted=transmitted,
        measured_interference_w=measured,
    )

    # advance world: TVWS chain, mobility, fresh fading
    next_tvws = []
    for b in state.bands:
        if b.rat is RatKind.TV_WHITE_SPACE:
            u = state.streams.tvws.random()
            on = state.tvws_on[b.index]
            next_tvws.append(bool((u < b.tvws_occupancy.p_off_to_on) if not on
                                  else (u >= b.tvws_occupancy.p_on_to_off)))
        else:
            next_tvws.append(False)
    next_scenario = step_mobility(sc, cfg.slot_duration_s, state.streams.mobility)
    next_state = replace(
        state,
        scenario=next_scenario,
        slot=state.slot + 1,
        payloads=tuple(new_payloads),
        tvws_on=tuple(next_tvws),
        fading_lin=_draw_fading(state.streams.fading, k + m, k + 1, n_b),
    )
    return outcome, next_state


def compute_reward(
    outcome: SlotOutcome,
    terminal: bool,
    all_delivered: bool,
    weights: RewardWeights,
    num_agents: int,
) -> np.ndarray:
    """Common scalar reward broadcast to all agents (fully cooperative).

    Shaped mode sums the V2I capacities plus the delivered V2V goodput (both
    in Mbps, weighted per-Mbps); the terminal bonus lands only when every
    payload arrived.  Strict mode keeps the terminal term alone.
    """
    terminal_component = weights.beta if (terminal and all_delivered) else 0.0
    if weights.strict:
        common = terminal_component
    else:
        common = (
            weights.lambda_i * float(outcome.v2i_capacity_bps.sum()) / 1e6
            + weights.lambda_v * float(outcome.v2v_goodput_bps.sum()) / 1e6
            + terminal_component
        )
    return np.full(num_agents, common)


Policy = Callable[[EpisodeState, int, Optional[SlotOutcome]], Action]


def run_episode(
    policies: Sequence[Policy],
    scenario: Scenario,
    bands: tuple[Band, ...],
    config: EpisodeConfig,
    streams: EpisodeStreams,
) -> EpisodeMetrics:
    """Run the full slot horizon and aggregate metrics.

    Policies map (state, agent index, previous outcome) to an Action and are
    only consulted while the agent's payload is unresolved.  The environment
    keeps running after all payloads resolve so V2I capacity is accounted over
    the whole window; reward accrues only up to the resolving slot.
    """
    k = len(scenario.v2v_links)
    if len(policies) != k:
        raise ValueError(f"got {len(policies)} policies for K={k} agents")
    state = new_episode(scenario, bands, config, streams)
    prev: Optional[SlotOutcome] = None
    idle = Action(0, 0)
    v2i_sum = 0.0
    cum_reward = 0.0
    slots_used = config.num_slots
    resolved_seen = state.all_resolved  # zero-byte payloads resolve instantly
    if resolved_seen:
        slots_used = 0
    for t in range(config.num_slots):
        joint = [
            policies[i](state, i, prev) if not state.payloads[i].resolved else idle
            for i in range(k)
        ]
        outcome, state = step(state, joint)
        v2i_sum += float(outcome.v2i_capacity_bps.sum())
        if not resolved_seen:
            terminal = state.all_resolved or t == config.num_slots - 1
            all_delivered = all(p.delivered for p in state.payloads)
            cum_reward += float(
                compute_reward(outcome, terminal, all_delivered, config.reward, k)[0]
            )
            if state.all_resolved:
                resolved_seen = True
                slots_used = t + 1
        prev = outcome
    flags = tuple(p.delivered and not p.failed for p in state.payloads)
    return EpisodeMetrics(
        v2i_sum_capacity_bps=v2i_sum / config.num_slots,
        success_flags=flags,
        cumulative_reward=cum_reward,
        slots_used=slots_used,
    )


def success_probability(flags) -> float:
    """Fraction of true flags over runs x agents."""
    flat = np.asarray(flags).reshape(-1)
    if flat.size == 0:
        raise ValueError("need at least one flag")
    return float(np.count_nonzero(flat)) / flat.size
