"""Experiment configuration: flat `key = value` files with dotted key paths.

Every key is optional and falls back to a documented default, so a minimal
file (even an empty one) is a valid experiment.  Lists are comma-separated.
`#` starts a comment.  Errors name the offending key path and line number.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .baselines import PolicyKind
from .channel import RatKind, RatParams, TvwsOccupancy
from .episode import EpisodeConfig, RewardWeights
from .marl import TrainConfig
from .topology import ScenarioConfig


class ConfigError(ValueError):
    """Malformed or invalid configuration; message carries key path and line."""


# (key, kind, default); kind in {int, float, bool, str, int_list, float_list, str_list}
_SCHEMA: list[tuple[str, str, object]] = [
    ("scenario.num_vehicles", "int", 20),
    ("scenario.num_v2v", "int", 4),
    ("scenario.num_v2i", "int", 4),
    ("scenario.num_wifi_aps", "int", 3),
    ("scenario.wifi_radius_m", "float", 100.0),
    ("scenario.grid_width_m", "float", 250.0),
    ("scenario.grid_height_m", "float", 250.0),
    ("scenario.lane_spacing_m", "float", 50.0),
    ("scenario.speed_min_mps", "float", 10.0),
    ("scenario.speed_max_mps", "float", 15.0),
    ("bands.include_dsrc", "bool", True),
    ("bands.include_tvws", "bool", True),
    ("bands.cellular.carrier_hz", "float", 2.0e9),
    ("bands.cellular.bandwidth_hz", "float", 1.0e6),
    ("bands.cellular.alpha", "float", 3.0),
    ("bands.cellular.pl0_db", "float", 60.0),
    ("bands.cellular.shadow_sigma_db", "float", 8.0),
    ("bands.dsrc.carrier_hz", "float", 5.9e9),
    ("bands.dsrc.bandwidth_hz", "float", 10.0e6),
    ("bands.dsrc.alpha", "float", 2.8),
    ("bands.dsrc.pl0_db", "float", 63.0),
    ("bands.dsrc.shadow_sigma_db", "float", 4.0),
    ("bands.wifi.carrier_hz", "float", 5.0e9),
    ("bands.wifi.bandwidth_hz", "float", 20.0e6),
    ("bands.wifi.alpha", "float", 3.2),
    ("bands.wifi.pl0_db", "float", 62.0),
    ("bands.wifi.shadow_sigma_db", "float", 6.0),
    ("bands.tvws.carrier_hz", "float", 600.0e6),
    ("bands.tvws.bandwidth_hz", "float", 6.0e6),
    ("bands.tvws.alpha", "float", 2.5),
    ("bands.tvws.pl0_db", "float", 50.0),
    ("bands.tvws.shadow_sigma_db", "float", 6.0),
    ("bands.tvws.p_off_to_on", "float", 0.05),
    ("bands.tvws.p_on_to_off", "float", 0.1),
    ("episode.num_slots", "int", 100),
    ("episode.slot_duration_s", "float", 1e-3),
    ("episode.chunk_bytes", "int", 300),
    ("episode.sinr_min", "float", 1.0),
    ("episode.powers_dbm", "float_list", [23.0, 10.0, 5.0]),
    ("episode.v2i_power_dbm", "float", 0.0),
    ("episode.gain_db_min", "float", -120.0),
    ("episode.gain_db_max", "float", -40.0),
    ("episode.interference_dbm_min", "float", -120.0),
    ("episode.interference_dbm_max", "float", -30.0),
    ("reward.lambda_i", "float", 0.1),
    ("reward.lambda_v", "float", 0.9),
    ("reward.beta", "float", 10.0),
    ("reward.strict", "bool", False),
    ("train.episodes", "int", 1500),
    ("train.learning_rate", "float", 1e-3),
    ("train.gamma", "float", 0.95),
    ("train.replay_capacity", "int", 50_000),
    ("train.batch_size", "int", 64),
    ("train.target_copy_period", "int", 200),
    ("train.update_period", "int", 2),
    ("train.epsilon_start", "float", 1.0),
    ("train.epsilon_end", "float", 0.02),
    ("train.epsilon_decay_episodes", "int", 600),
    ("train.grad_clip", "float", 10.0),
    ("train.hidden", "int_list", [256, 128]),
    ("sweep.payload_bytes", "int_list", [1060, 2120, 3180, 4240, 5300, 6360]),
    ("sweep.seeds", "int_list", [1, 2, 3]),
    ("sweep.policies", "str_list", ["marl", "sarl", "random", "greedy"]),
    ("sweep.replicates", "int", 100),
    ("sweep.out_dir", "str", "results"),
]

_SCHEMA_BY_KEY = {key: (kind, default) for key, kind, default in _SCHEMA}


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioConfig
    rat_params: dict[RatKind, RatParams]
    tvws_occupancy: TvwsOccupancy
    include_dsrc: bool
    include_tvws: bool
    episode: EpisodeConfig          # payload_bytes is overwritten per sweep point
    train: TrainConfig
    policies: tuple[PolicyKind, ...]
    payloads: tuple[int, ...]
    seeds: tuple[int, ...]
    replicates: int
    out_dir: str
    raw: dict = field(default_factory=dict, compare=False)


def _parse_scalar(raw: str, kind: str, key: str, line: int):
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            low = raw.lower()
            if low in ("true", "yes", "1"):
                return True
            if low in ("false", "no", "0"):
                return False
            raise ValueError(raw)
        if kind == "str":
            return raw
        if kind.endswith("_list"):
            items = [part.strip() for part in raw.split(",") if part.strip()]
            elem = kind[:-5]
            if elem == "int":
                return [int(p) for p in items]
            if elem == "float":
                return [float(p) for p in items]
            return items
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind} (line {line})") from None
    raise ConfigError(f"{key}: unknown value kind {kind!r} (line {line})")


def parse_flat_text(text: str) -> dict[str, tuple[str, int]]:
    """key -> (raw value, line number); rejects malformed and duplicate keys."""
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value' (line {lineno}): {raw_line.strip()!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"empty key (line {lineno})")
        if key in entries:
            raise ConfigError(f"{key}: duplicate key (line {lineno}, first at line {entries[key][1]})")
        entries[key] = (value.strip(), lineno)
    return entries


def _resolve(entries: dict[str, tuple[str, int]]) -> tuple[dict, dict[str, int]]:
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    for key, (raw, line) in entries.items():
        if key not in _SCHEMA_BY_KEY:
            raise ConfigError(f"{key}: unknown key (line {line})")
        kind, _ = _SCHEMA_BY_KEY[key]
        values[key] = _parse_scalar(raw, kind, key, line)
        lines[key] = line
    for key, kind, default in _SCHEMA:
        values.setdefault(key, list(default) if isinstance(default, list) else default)
        lines.setdefault(key, 0)
    return values, lines


def _fail(key: str, lines: dict[str, int], message: str) -> None:
    where = f"line {lines[key]}" if lines.get(key) else "default"
    raise ConfigError(f"{key}: {message} ({where})")


def _build(values: dict, lines: dict[str, int]) -> ExperimentConfig:
    v = values
    scenario = ScenarioConfig(
        num_vehicles=v["scenario.num_vehicles"],
        num_v2v=v["scenario.num_v2v"],
        num_v2i=v["scenario.num_v2i"],
        num_wifi_aps=v["scenario.num_wifi_aps"],
        wifi_radius_m=v["scenario.wifi_radius_m"],
        grid_width_m=v["scenario.grid_width_m"],
        grid_height_m=v["scenario.grid_height_m"],
        lane_spacing_m=v["scenario.lane_spacing_m"],
        speed_min_mps=v["scenario.speed_min_mps"],
        speed_max_mps=v["scenario.speed_max_mps"],
    )
    rat_params = {}
    for rat, prefix in (
        (RatKind.CELLULAR_SUBBAND, "bands.cellular"),
        (RatKind.DSRC, "bands.dsrc"),
        (RatKind.WIFI_AP, "bands.wifi"),
        (RatKind.TV_WHITE_SPACE, "bands.tvws"),
    ):
        rat_params[rat] = RatParams(
            carrier_hz=v[f"{prefix}.carrier_hz"],
            bandwidth_hz=v[f"{prefix}.bandwidth_hz"],
            alpha=v[f"{prefix}.alpha"],
            pl0_db=v[f"{prefix}.pl0_db"],
            shadow_sigma_db=v[f"{prefix}.shadow_sigma_db"],
        )
    episode = EpisodeConfig(
        num_slots=v["episode.num_slots"],
        slot_duration_s=v["episode.slot_duration_s"],
        payload_bytes=v["sweep.payload_bytes"][0] if v["sweep.payload_bytes"] else 1060,
        chunk_bytes=v["episode.chunk_bytes"],
        sinr_min=v["episode.sinr_min"],
        powers_dbm=tuple(v["episode.powers_dbm"]),
        v2i_power_dbm=v["episode.v2i_power_dbm"],
        reward=RewardWeights(
            lambda_i=v["reward.lambda_i"],
            lambda_v=v["reward.lambda_v"],
            beta=v["reward.beta"],
            strict=v["reward.strict"],
        ),
        gain_db_range=(v["episode.gain_db_min"], v["episode.gain_db_max"]),
        interference_dbm_range=(v["episode.interference_dbm_min"], v["episode.interference_dbm_max"]),
    )
    train = TrainConfig(
        episodes=v["train.episodes"],
        learning_rate=v["train.learning_rate"],
        gamma=v["train.gamma"],
        replay_capacity=v["train.replay_capacity"],
        batch_size=v["train.batch_size"],
        target_copy_period=v["train.target_copy_period"],
        update_period=v["train.update_period"],
        epsilon_start=v["train.epsilon_start"],
        epsilon_end=v["train.epsilon_end"],
        epsilon_decay_episodes=v["train.epsilon_decay_episodes"],
        grad_clip=v["train.grad_clip"],
        hidden=tuple(v["train.hidden"]),
    )
    try:
        policies = tuple(PolicyKind(p) for p in v["sweep.policies"])
    except ValueError:
        _fail("sweep.policies", lines,
              f"unknown policy in {v['sweep.policies']}; valid: marl, sarl, random, greedy")

    config = ExperimentConfig(
        scenario=scenario,
        rat_params=rat_params,
        tvws_occupancy=TvwsOccupancy(
            p_off_to_on=v["bands.tvws.p_off_to_on"], p_on_to_off=v["bands.tvws.p_on_to_off"]
        ),
        include_dsrc=v["bands.include_dsrc"],
        include_tvws=v["bands.include_tvws"],
        episode=episode,
        train=train,
        policies=policies,
        payloads=tuple(v["sweep.payload_bytes"]),
        seeds=tuple(v["sweep.seeds"]),
        replicates=v["sweep.replicates"],
        out_dir=v["sweep.out_dir"],
        raw=dict(values),
    )
    _validate(config, lines)
    return config


def _validate(cfg: ExperimentConfig, lines: dict[str, int]) -> None:
    if not cfg.payloads:
        _fail("sweep.payload_bytes", lines, "at least one payload is required")
    for p in cfg.payloads:
        if p <= 0:
            _fail("sweep.payload_bytes", lines, f"payload values must be > 0, got {p}")
    if not cfg.seeds:
        _fail("sweep.seeds", lines, "at least one seed is required")
    if len(set(cfg.seeds)) != len(cfg.seeds):
        _fail("sweep.seeds", lines, "seeds must be distinct")
    if not cfg.policies:
        _fail("sweep.policies", lines, "at least one policy is required")
    if cfg.replicates < 1:
        _fail("sweep.replicates", lines, f"replicates must be >= 1, got {cfg.replicates}")
    sc = cfg.scenario
    if sc.num_v2v < 1 or sc.num_v2i < 1:
        _fail("scenario.num_v2v", lines, "need at least one V2V and one V2I link")
    if sc.num_vehicles < max(2 * sc.num_v2v, sc.num_v2i):
        _fail("scenario.num_vehicles", lines,
              f"need >= max(2K, M) = {max(2 * sc.num_v2v, sc.num_v2i)} vehicles")
    if sc.num_wifi_aps < 0:
        _fail("scenario.num_wifi_aps", lines, "cannot be negative")
    if sc.speed_min_mps < 0 or sc.speed_max_mps < sc.speed_min_mps:
        _fail("scenario.speed_min_mps", lines, "need 0 <= speed_min <= speed_max")
    ep = cfg.episode
    if ep.num_slots < 1:
        _fail("episode.num_slots", lines, "need >= 1 slot")
    if ep.slot_duration_s <= 0:
        _fail("episode.slot_duration_s", lines, "must be > 0")
    if ep.chunk_bytes < 1:
        _fail("episode.chunk_bytes", lines, "must be >= 1")
    if not ep.powers_dbm:
        _fail("episode.powers_dbm", lines, "need at least one power level")
    if ep.sinr_min < 0:
        _fail("episode.sinr_min", lines, "must be >= 0")
    for rat, params in cfg.rat_params.items():
        if params.bandwidth_hz <= 0:
            _fail(f"bands.{rat.value}.bandwidth_hz", lines, "must be > 0")
        if params.shadow_sigma_db < 0:
            _fail(f"bands.{rat.value}.shadow_sigma_db", lines, "must be >= 0")
    occ = cfg.tvws_occupancy
    for name, p in (("p_off_to_on", occ.p_off_to_on), ("p_on_to_off", occ.p_on_to_off)):
        if not 0.0 <= p <= 1.0:
            _fail(f"bands.tvws.{name}", lines, f"must be in [0, 1], got {p}")
    try:
        cfg.train.validate()
    except ValueError as exc:
        raise ConfigError(f"train: {exc}") from None
    if cfg.train.epsilon_decay_episodes < 1:
        _fail("train.epsilon_decay_episodes", lines, "must be >= 1")


def loads_config(text: str) -> ExperimentConfig:
    values, lines = _resolve(parse_flat_text(text))
    return _build(values, lines)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    return loads_config(text)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ", ".join(_format_value(x) for x in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg: ExperimentConfig) -> str:
    """Canonical flat text in schema order; loads back to an equal config."""
    lines = []
    for key, _, _ in _SCHEMA:
        lines.append(f"{key} = {_format_value(cfg.raw[key])}")
    return "\n".join(lines) + "\n"
