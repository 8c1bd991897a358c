"""hetvnet: heterogeneous vehicular network simulator with learned spectrum access.

Vehicle-to-vehicle links act as independent Q-learning agents that sense
per-band channel state and pick a (band, power) pair each millisecond slot --
across cellular sub-bands, DSRC, Wi-Fi APs and TV white space -- to deliver
chunked safety payloads while protecting pre-assigned V2I uplinks.
"""

from .baselines import (
    PolicyKind,
    greedy_policy,
    make_greedy_policy,
    make_random_policy,
    random_policy,
    sarl_train,
)
from .channel import (
    Band,
    ChannelGain,
    RatKind,
    RatParams,
    SinrReport,
    Transmission,
    TvwsOccupancy,
    band_available,
    build_band_catalog,
    capacity,
    compute_sinr,
    path_loss,
    sample_fast_fading,
    sample_shadowing,
)
from .config import ConfigError, ExperimentConfig, load_config, loads_config, serialize_config
from .episode import (
    Action,
    EpisodeConfig,
    EpisodeMetrics,
    EpisodeStreams,
    PayloadTask,
    RewardWeights,
    SlotOutcome,
    compute_reward,
    new_episode,
    run_episode,
    step,
    success_probability,
)
from .harness import run_experiment, train_cell, eval_cell
from .marl import (
    TrainConfig,
    TrainingTrace,
    greedy_policy_from_net,
    linear_epsilon,
    observation_dim,
    observe,
    train,
)
from .qnet import (
    QNetwork,
    ReplayBuffer,
    TransitionBatch,
    init_qnetwork,
    load_checkpoint,
    save_checkpoint,
    select_action,
    train_step,
)
from .streams import StreamFamily, substream
from .topology import Scenario, ScenarioConfig, Vehicle, pairwise_distance, spawn_scenario, step_mobility

__version__ = "0.1.0"
