"""
Watching independent learners discover orthogonal bands
=======================================================

Two agents, two always-usable high-rate bands (DSRC and a quiet TV white
space channel).  Random play collides and dies; a few hundred episodes of
Q-learning are enough for the pair to settle on a non-colliding assignment.
Takes a few seconds on a laptop CPU.
"""

import numpy as np

from hetvnet import EpisodeConfig, ScenarioConfig, TrainConfig, build_band_catalog, spawn_scenario
from hetvnet.channel import TvwsOccupancy
from hetvnet.marl import train
from hetvnet.streams import StreamFamily, substream

scenario_config = ScenarioConfig(num_vehicles=8, num_v2v=2, num_v2i=1, num_wifi_aps=0)
bands = build_band_catalog(
    num_cellular=1, num_wifi_aps=0,
    tvws_occupancy=TvwsOccupancy(p_off_to_on=0.0, p_on_to_off=1.0),  # primary stays off
)
episode_config = EpisodeConfig(payload_bytes=1060)
train_config = TrainConfig(episodes=500, epsilon_decay_episodes=400)

seeds = substream(11, "train-scn").integers(2**62, size=500)
nets, trace = train(
    lambda ep: spawn_scenario(scenario_config, int(seeds[ep])),
    train_config, bands, episode_config, StreamFamily(11, "train"),
)

successes = np.array(trace.episode_successes)
for lo in range(0, 500, 100):
    frac = successes[lo:lo + 100].sum() / (100 * 2)
    print(f"episodes {lo:3d}-{lo + 99}: success probability {frac:.2f}")
print(f"\nreward (mean of last 50 episodes): {np.mean(trace.episode_rewards[-50:]):.1f}")
