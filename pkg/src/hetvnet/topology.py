"""World model: Manhattan road grid, vehicle mobility, V2V/V2I link layout.

Vehicles live on the lanes of a rectangular grid, move at constant speed and
turn randomly at intersections.  A scenario is an immutable snapshot; mobility
produces a new snapshot, so snapshots can be shared read-only across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class Vehicle:
    id: int
    position: tuple[float, float]
    speed: float          # m/s, constant for the episode
    heading: tuple[float, float]  # unit vector along a lane axis


@dataclass(frozen=True)
class ScenarioConfig:
    num_vehicles: int = 20
    num_v2v: int = 4              # K agents
    num_v2i: int = 4              # M cellular uplinks, one per sub-band
    num_wifi_aps: int = 3
    wifi_radius_m: float = 100.0
    grid_width_m: float = 250.0
    grid_height_m: float = 250.0
    lane_spacing_m: float = 50.0
    speed_min_mps: float = 10.0
    speed_max_mps: float = 15.0


@dataclass(frozen=True)
class Scenario:
    vehicles: tuple[Vehicle, ...]
    base_station: tuple[float, float]
    wifi_aps: tuple[tuple[float, float], ...]
    wifi_radius_m: float
    v2i_links: tuple[tuple[int, int], ...]   # (vehicle id, cellular sub-band index)
    v2v_links: tuple[tuple[int, int], ...]   # (transmitter id, receiver id)
    config: ScenarioConfig

    @property
    def num_agents(self) -> int:
        return len(self.v2v_links)

    def positions(self) -> np.ndarray:
        """(N, 2) array of vehicle positions, indexed by vehicle id."""
        return np.array([v.position for v in self.vehicles], dtype=float)


def pairwise_distance(a, b) -> float:
    """Euclidean distance between two 2-D points, in meters."""
    return math.hypot(a[0] - b[0], a[1] - b[1])


# Turn probabilities at an intersection: left / right / straight.
TURN_LEFT_P = 0.25
TURN_RIGHT_P = 0.25

_AXES = ((1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0))


def _lane_coords(extent: float, spacing: float) -> np.ndarray:
    n = int(round(extent / spacing))
    return np.linspace(0.0, extent, n + 1)


def spawn_scenario(config: ScenarioConfig, seed: int) -> Scenario:
    """Drop vehicles on lanes and wire up V2V/V2I links.

    Deterministic in (config, seed).  Each V2V receiver is its transmitter's
    nearest not-yet-used neighbor, so the 2K endpoints are disjoint; each V2I
    vehicle gets a distinct cellular sub-band.
    """
    from .streams import substream

    k, m, n = config.num_v2v, config.num_v2i, config.num_vehicles
    if k < 1 or m < 1:
        raise ValueError(f"need K >= 1 V2V links and M >= 1 V2I links, got K={k}, M={m}")
    if n < max(2 * k, m):
        raise ValueError(
            f"num_vehicles={n} cannot supply {k} disjoint V2V pairs "
            f"and {m} V2I links (need >= {max(2 * k, m)})"
        )

    rng = substream(seed, "scenario")
    xs = _lane_coords(config.grid_width_m, config.lane_spacing_m)
    ys = _lane_coords(config.grid_height_m, config.lane_spacing_m)

    vehicles = []
    for vid in range(n):
        speed = rng.uniform(config.speed_min_mps, config.speed_max_mps)
        if rng.random() < 0.5:
            # horizontal lane: fixed y, random x
            y = float(rng.choice(ys))
            x = float(rng.uniform(0.0, config.grid_width_m))
            heading = (1.0, 0.0) if rng.random() < 0.5 else (-1.0, 0.0)
        else:
            x = float(rng.choice(xs))
            y = float(rng.uniform(0.0, config.grid_height_m))
            heading = (0.0, 1.0) if rng.random() < 0.5 else (0.0, -1.0)
        vehicles.append(Vehicle(id=vid, position=(x, y), speed=float(speed), heading=heading))

    # V2V pairing: walk a random permutation, pair each new transmitter with
    # its nearest unused vehicle.  All endpoints are distinct by construction.
    order = rng.permutation(n)
    used: set[int] = set()
    v2v = []
    for tx in order:
        tx = int(tx)
        if len(v2v) == k:
            break
        if tx in used:
            continue
        best, best_d = -1, float("inf")
        for other in vehicles:
            if other.id == tx or other.id in used:
                continue
            d = pairwise_distance(vehicles[tx].position, other.position)
            if d < best_d:
                best, best_d = other.id, d
        if best < 0:
            raise ValueError(f"cannot form {k} disjoint V2V pairs from {n} vehicles")
        used.update((tx, best))
        v2v.append((tx, best))
    if len(v2v) < k:
        raise ValueError(f"cannot form {k} disjoint V2V pairs from {n} vehicles")

    v2i_vehicles = rng.choice(n, size=m, replace=False)
    v2i = tuple((int(vid), band) for band, vid in enumerate(v2i_vehicles))

    aps = tuple(
        (float(rng.uniform(0.0, config.grid_width_m)), float(rng.uniform(0.0, config.grid_height_m)))
        for _ in range(config.num_wifi_aps)
    )

    return Scenario(
        vehicles=tuple(vehicles),
        base_station=(config.grid_width_m / 2.0, config.grid_height_m / 2.0),
        wifi_aps=aps,
        wifi_radius_m=config.wifi_radius_m,
        v2i_links=v2i,
        v2v_links=tuple(v2v),
        config=config,
    )


def _advance_vehicle(v: Vehicle, dt: float, cfg: ScenarioConfig, rng: np.random.Generator) -> Vehicle:
    x, y = v.position
    hx, hy = v.heading
    spacing = cfg.lane_spacing_m
    remaining = v.speed * dt

    # Walk segment by segment; a turn decision is drawn whenever the vehicle
    # reaches a grid intersection along its movement axis.
    while remaining > 0.0:
        if hx != 0.0:
            pos, h = x, hx
        else:
            pos, h = y, hy
        # distance to the next intersection strictly ahead
        if h > 0:
            next_node = (math.floor(pos / spacing + 1e-9) + 1) * spacing
            gap = next_node - pos
        else:
            next_node = (math.ceil(pos / spacing - 1e-9) - 1) * spacing
            gap = pos - next_node
        if remaining < gap:
            if hx != 0.0:
                x += hx * remaining
            else:
                y += hy * remaining
            remaining = 0.0
            break
        # land on the intersection and maybe turn
        if hx != 0.0:
            x = next_node
        else:
            y = next_node
        remaining -= gap
        u = rng.random()
        if u < TURN_LEFT_P:
            hx, hy = -hy, hx
        elif u < TURN_LEFT_P + TURN_RIGHT_P:
            hx, hy = hy, -hx
        # else: straight on

    x %= cfg.grid_width_m
    y %= cfg.grid_height_m
    return replace(v, position=(float(x), float(y)), heading=(hx, hy))


def step_mobility(scenario: Scenario, dt: float, rng: np.random.Generator) -> Scenario:
    """Advance every vehicle by dt seconds; wrap-around at grid bounds.

    Intersection turns draw from `rng` in vehicle-id order, so trajectories
    are deterministic per stream.  Link assignments are untouched.
    """
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    if dt == 0:
        return scenario
    cfg = scenario.config
    moved = tuple(_advance_vehicle(v, dt, cfg, rng) for v in scenario.vehicles)
    return replace(scenario, vehicles=moved)
