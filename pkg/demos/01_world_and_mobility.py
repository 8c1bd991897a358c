"""
Spawning a vehicular world and watching it move
===============================================

A scenario drops vehicles on the lanes of a Manhattan grid, pairs each V2V
transmitter with its nearest neighbor, and assigns every V2I vehicle its own
cellular sub-band.  Everything is a deterministic function of (config, seed).
"""

import numpy as np

from hetvnet import ScenarioConfig, spawn_scenario, step_mobility, pairwise_distance
from hetvnet.streams import substream

config = ScenarioConfig(num_vehicles=20, num_v2v=4, num_v2i=4, num_wifi_aps=3)
scenario = spawn_scenario(config, seed=42)

print(f"{len(scenario.vehicles)} vehicles on a "
      f"{config.grid_width_m:.0f} x {config.grid_height_m:.0f} m grid")
print(f"base station at {scenario.base_station}")
for i, ap in enumerate(scenario.wifi_aps):
    print(f"Wi-Fi AP {i} at ({ap[0]:.0f}, {ap[1]:.0f}), radius {scenario.wifi_radius_m:.0f} m")

# V2V pairs are nearest neighbors, so link distances are short
for tx, rx in scenario.v2v_links:
    d = pairwise_distance(scenario.vehicles[tx].position, scenario.vehicles[rx].position)
    print(f"V2V link {tx} -> {rx}: {d:.1f} m")

# advance one second of mobility in 10 ms ticks and track total displacement
# (vehicles wrap at the grid edge, so cap the apparent jump at half the grid)
rng = substream(42, "mobility-demo")
moved = scenario
for _ in range(100):
    moved = step_mobility(moved, 0.01, rng)
delta = np.abs(moved.positions() - scenario.positions())
delta = np.minimum(delta, [config.grid_width_m, config.grid_height_m] - delta)
displacement = np.linalg.norm(delta, axis=1)
print(f"after 1 s: mean displacement {displacement.mean():.1f} m, "
      f"max {displacement.max():.1f} m, all positions still on the grid")
