import os

import numpy as np
import pytest

from hetvnet.baselines import PolicyKind
from hetvnet.config import ConfigError, load_config, loads_config, serialize_config
from hetvnet.harness import (
    RESULTS_HEADER,
    SUMMARY_HEADER,
    cli,
    eval_cell,
    fmt6,
    run_experiment,
)

# tiny but complete experiment: fast policies only, small world
SMALL_CONFIG = """
# unit-test experiment
scenario.num_vehicles = 10
scenario.num_v2v = 2
scenario.num_v2i = 2
scenario.num_wifi_aps = 1
sweep.payload_bytes = 600, 1200
sweep.seeds = 1, 2
sweep.policies = random, greedy
sweep.replicates = 5
episode.num_slots = 30
"""


def _cfg(tmp_path, text=SMALL_CONFIG, out=None):
    path = tmp_path / "exp.cfg"
    path.write_text(text)
    cfg = load_config(path)
    if out is not None:
        from dataclasses import replace

        cfg = replace(cfg, out_dir=str(out))
    return cfg, path


def test_minimal_config_applies_documented_defaults():
    cfg = loads_config("")
    assert cfg.scenario.num_vehicles == 20
    assert cfg.scenario.num_v2v == 4 and cfg.scenario.num_v2i == 4
    assert cfg.episode.chunk_bytes == 300
    assert cfg.episode.powers_dbm == (23.0, 10.0, 5.0)
    assert cfg.train.episodes == 1500
    assert cfg.train.gamma == 0.95
    assert cfg.payloads == (1060, 2120, 3180, 4240, 5300, 6360)
    assert cfg.policies == (PolicyKind.MARL, PolicyKind.SARL, PolicyKind.RANDOM, PolicyKind.GREEDY)
    assert cfg.episode.reward.lambda_i == 0.1 and cfg.episode.reward.beta == 10.0


def test_config_rejects_zero_payload_naming_key_and_line():
    with pytest.raises(ConfigError) as err:
        loads_config("sweep.payload_bytes = 1060, 0\n")
    assert "sweep.payload_bytes" in str(err.value)
    assert "line 1" in str(err.value)


def test_config_rejects_unknown_key_with_line():
    with pytest.raises(ConfigError) as err:
        loads_config("\nscenario.num_wheels = 4\n")
    assert "scenario.num_wheels" in str(err.value)
    assert "line 2" in str(err.value)


def test_config_rejects_type_mismatch_and_duplicates():
    with pytest.raises(ConfigError) as err:
        loads_config("train.gamma = fast\n")
    assert "train.gamma" in str(err.value)
    with pytest.raises(ConfigError) as err:
        loads_config("train.gamma = 0.9\ntrain.gamma = 0.8\n")
    assert "duplicate" in str(err.value)


def test_config_rejects_duplicate_seeds_and_bad_policy():
    with pytest.raises(ConfigError):
        loads_config("sweep.seeds = 1, 1\n")
    with pytest.raises(ConfigError) as err:
        loads_config("sweep.policies = marl, alphazero\n")
    assert "sweep.policies" in str(err.value)


def test_config_round_trip_is_equal():
    cfg = loads_config(SMALL_CONFIG)
    again = loads_config(serialize_config(cfg))
    assert again == cfg
    assert serialize_config(again) == serialize_config(cfg)


def test_results_row_count_for_random_only(tmp_path):
    text = SMALL_CONFIG.replace("sweep.policies = random, greedy", "sweep.policies = random")
    text = text.replace("sweep.payload_bytes = 600, 1200", "sweep.payload_bytes = 600")
    text = text.replace("sweep.seeds = 1, 2", "sweep.seeds = 7")
    text = text.replace("sweep.replicates = 5", "sweep.replicates = 10")
    path = tmp_path / "exp.cfg"
    path.write_text(text)
    from dataclasses import replace

    cfg = replace(load_config(path), out_dir=str(tmp_path / "out"))
    results, summary = run_experiment(cfg)
    lines = open(results).read().splitlines()
    assert lines[0] == RESULTS_HEADER
    assert len(lines) == 1 + 10


def test_rerun_is_byte_identical(tmp_path):
    cfg, _ = _cfg(tmp_path, out=tmp_path / "o1")
    r1, s1 = run_experiment(cfg)
    first = (open(r1, "rb").read(), open(s1, "rb").read())
    from dataclasses import replace

    cfg2 = replace(cfg, out_dir=str(tmp_path / "o2"))
    r2, s2 = run_experiment(cfg2)
    second = (open(r2, "rb").read(), open(s2, "rb").read())
    assert first == second


def test_summary_matches_recomputation_from_results(tmp_path):
    cfg, _ = _cfg(tmp_path, out=tmp_path / "out")
    results, summary = run_experiment(cfg)
    rows = [line.split(",") for line in open(results).read().splitlines()[1:]]
    summary_lines = open(summary).read().splitlines()
    assert summary_lines[0] == SUMMARY_HEADER
    got = {(r[0], r[1]): r for r in (line.split(",") for line in summary_lines[1:])}
    for policy in ("random", "greedy"):
        for payload in ("600", "1200"):
            cell = [r for r in rows if r[0] == policy and r[2] == payload]
            v2i = np.array([float(r[4]) for r in cell])
            succ = np.array([float(r[5]) for r in cell])
            line = got[(policy, payload)]
            assert line[2] == fmt6(v2i.mean())
            assert line[3] == fmt6(v2i.std())
            assert line[4] == fmt6(succ.mean())
            assert line[5] == fmt6(succ.std())
            assert line[6] == str(len(cell))


def test_eval_cell_is_deterministic(tmp_path):
    cfg, _ = _cfg(tmp_path)
    a = eval_cell(cfg, PolicyKind.RANDOM, 600, seed=1, nets=None)
    b = eval_cell(cfg, PolicyKind.RANDOM, 600, seed=1, nets=None)
    assert a == b


def test_no_partial_files_left_behind(tmp_path):
    cfg, _ = _cfg(tmp_path, out=tmp_path / "out")
    run_experiment(cfg)
    leftovers = [f for f in os.listdir(tmp_path / "out") if f.endswith(".part")]
    assert leftovers == []


def test_cli_validate_config_ok(tmp_path, capsys):
    _, path = _cfg(tmp_path)
    assert cli(["validate-config", "--config", str(path)]) == 0
    assert "OK" in capsys.readouterr().out


def test_cli_unknown_subcommand_exits_1(capsys):
    assert cli(["explode"]) == 1
    assert cli([]) == 1


def test_cli_unknown_flag_exits_1(tmp_path, capsys):
    _, path = _cfg(tmp_path)
    assert cli(["sweep", "--config", str(path), "--frobnicate"]) == 1
    err = capsys.readouterr().err
    assert "usage" in err.lower()


def test_cli_config_errors_exit_2(tmp_path, capsys):
    missing = tmp_path / "nope.cfg"
    assert cli(["validate-config", "--config", str(missing)]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("sweep.payload_bytes = 0\n")
    assert cli(["validate-config", "--config", str(bad)]) == 2


def test_cli_sweep_writes_outputs(tmp_path):
    _, path = _cfg(tmp_path)
    out = tmp_path / "cli-out"
    assert cli(["sweep", "--config", str(path), "--out", str(out)]) == 0
    assert (out / "results.csv").exists()
    assert (out / "summary.csv").exists()


def test_cli_seed_and_policy_overrides(tmp_path):
    _, path = _cfg(tmp_path)
    out = tmp_path / "cli-out2"
    code = cli(["sweep", "--config", str(path), "--out", str(out),
                "--seed", "5", "--policy", "random"])
    assert code == 0
    lines = open(out / "results.csv").read().splitlines()[1:]
    assert all(line.split(",")[0] == "random" for line in lines)
    assert all(line.split(",")[1] == "5" for line in lines)


def test_cli_eval_without_checkpoints_exits_3(tmp_path, capsys):
    text = SMALL_CONFIG.replace("sweep.policies = random, greedy", "sweep.policies = marl")
    path = tmp_path / "exp.cfg"
    path.write_text(text)
    out = tmp_path / "no-ckpt"
    assert cli(["eval", "--config", str(path), "--out", str(out)]) == 3
    assert "checkpoint" in capsys.readouterr().err


def test_cli_train_then_eval_round_trip(tmp_path):
    text = """
scenario.num_vehicles = 8
scenario.num_v2v = 2
scenario.num_v2i = 1
scenario.num_wifi_aps = 0
sweep.payload_bytes = 600
sweep.seeds = 3
sweep.policies = marl
sweep.replicates = 3
episode.num_slots = 20
train.episodes = 5
train.epsilon_decay_episodes = 4
"""
    path = tmp_path / "exp.cfg"
    path.write_text(text)
    out = tmp_path / "rt"
    assert cli(["train", "--config", str(path), "--out", str(out)]) == 0
    assert (out / "trace.csv").exists()
    ckpts = os.listdir(out / "checkpoints")
    assert sorted(ckpts) == [
        "marl_payload600_seed3_agent0.qnet",
        "marl_payload600_seed3_agent1.qnet",
    ]
    assert cli(["eval", "--config", str(path), "--out", str(out)]) == 0
    lines = open(out / "results.csv").read().splitlines()
    assert len(lines) == 1 + 3


def test_sweep_eval_consistency_for_learned_policy(tmp_path):
    # sweep (in-memory nets) and train+eval (reloaded nets) agree exactly
    text = """
scenario.num_vehicles = 8
scenario.num_v2v = 2
scenario.num_v2i = 1
scenario.num_wifi_aps = 0
sweep.payload_bytes = 600
sweep.seeds = 3
sweep.policies = marl
sweep.replicates = 3
episode.num_slots = 20
train.episodes = 5
train.epsilon_decay_episodes = 4
"""
    path = tmp_path / "exp.cfg"
    path.write_text(text)
    out_sweep = tmp_path / "sweep"
    out_rt = tmp_path / "train-eval"
    assert cli(["sweep", "--config", str(path), "--out", str(out_sweep)]) == 0
    assert cli(["train", "--config", str(path), "--out", str(out_rt)]) == 0
    assert cli(["eval", "--config", str(path), "--out", str(out_rt)]) == 0
    assert open(out_sweep / "results.csv").read() == open(out_rt / "results.csv").read()


def test_threads_env_validation(tmp_path, monkeypatch):
    cfg, _ = _cfg(tmp_path, out=tmp_path / "out")
    monkeypatch.setenv("HETVNET_THREADS", "banana")
    with pytest.raises(ValueError):
        run_experiment(cfg)


def test_threads_env_parallel_matches_serial(tmp_path, monkeypatch):
    cfg, _ = _cfg(tmp_path, out=tmp_path / "par")
    monkeypatch.setenv("HETVNET_THREADS", "2")
    r_par, s_par = run_experiment(cfg)
    par = (open(r_par, "rb").read(), open(s_par, "rb").read())
    monkeypatch.setenv("HETVNET_THREADS", "1")
    from dataclasses import replace

    cfg2 = replace(cfg, out_dir=str(tmp_path / "ser"))
    r_ser, s_ser = run_experiment(cfg2)
    ser = (open(r_ser, "rb").read(), open(s_ser, "rb").read())
    assert par == ser
